#include "lrm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "lrm/rng.hpp"

namespace lrm {

namespace {

void check_mask(const Mask& mask, int m, int t) {
    if (const auto* p = std::get_if<PointMask>(&mask)) {
        if (p->row < 0 || p->row >= m || p->col < 0 || p->col >= t)
            throw std::invalid_argument("Mask: point index out of range");
    } else if (const auto* c = std::get_if<ColumnMask>(&mask)) {
        if (c->task < 0 || c->task >= t)
            throw std::invalid_argument("Mask: column task out of range");
        if (static_cast<int>(c->x.size()) != m)
            throw std::invalid_argument("Mask: predictor length != m");
        for (double v : c->x)
            if (!std::isfinite(v)) throw std::invalid_argument("Mask: non-finite predictor");
    } else {
        const auto& d = std::get<DenseMask>(mask);
        if (d.data.rows() != m || d.data.cols() != t)
            throw std::invalid_argument("Mask: dense dims != m x T");
        if (!d.data.is_finite()) throw std::invalid_argument("Mask: non-finite dense mask");
    }
}

} // namespace

SamplingOperator::SamplingOperator(int m, int t, std::vector<Mask> masks)
    : m_(m), t_(t), masks_(std::move(masks)) {
    if (m_ < 1 || t_ < 1) throw std::invalid_argument("SamplingOperator: bad dims");
    if (masks_.empty()) throw std::invalid_argument("SamplingOperator: need N >= 1 masks");
    for (const Mask& mask : masks_) check_mask(mask, m_, t_);
}

bool SamplingOperator::all_point() const {
    return std::all_of(masks_.begin(), masks_.end(),
                       [](const Mask& m) { return std::holds_alternative<PointMask>(m); });
}

bool SamplingOperator::all_column() const {
    return std::all_of(masks_.begin(), masks_.end(),
                       [](const Mask& m) { return std::holds_alternative<ColumnMask>(m); });
}

double mask_response(const Mask& mask, const Matrix& a) {
    if (const auto* p = std::get_if<PointMask>(&mask)) return a(p->row, p->col);
    if (const auto* c = std::get_if<ColumnMask>(&mask)) {
        double s = 0.0;
        for (int i = 0; i < a.rows(); ++i) s += c->x[i] * a(i, c->task);
        return s;
    }
    return trace_dot(std::get<DenseMask>(mask).data, a);
}

void mask_accumulate(const Mask& mask, double weight, Matrix& into) {
    if (weight == 0.0) return;
    if (const auto* p = std::get_if<PointMask>(&mask)) {
        into(p->row, p->col) += weight;
    } else if (const auto* c = std::get_if<ColumnMask>(&mask)) {
        for (int i = 0; i < into.rows(); ++i) into(i, c->task) += weight * c->x[i];
    } else {
        const auto& d = std::get<DenseMask>(mask).data;
        auto dst = into.entries();
        auto src = d.entries();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weight * src[i];
    }
}

std::vector<double> apply(const SamplingOperator& op, const Matrix& a) {
    if (a.rows() != op.m() || a.cols() != op.t())
        throw std::invalid_argument("apply: dimension mismatch");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(op.n()));
    std::vector<double> out(op.masks().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mask_response(op.masks()[i], a) * inv_sqrt_n;
    return out;
}

Matrix adjoint(const SamplingOperator& op, std::span<const double> z) {
    if (static_cast<int>(z.size()) != op.n())
        throw std::invalid_argument("adjoint: length mismatch");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(op.n()));
    Matrix out(op.m(), op.t());
    for (std::size_t i = 0; i < z.size(); ++i)
        mask_accumulate(op.masks()[i], z[i] * inv_sqrt_n, out);
    return out;
}

double operator_norm(const SamplingOperator& op, double rel_tol, int max_iters) {
    Rng rng(0x0b5e55ed5eedULL);
    Matrix b(op.m(), op.t());
    for (double& x : b.entries()) x = rng.gaussian();
    double nb = frobenius_norm(b);
    if (nb == 0.0) return 0.0;
    b *= 1.0 / nb;

    double lambda = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        const Matrix g = adjoint(op, apply(op, b)); // (L*L) b, PSD
        const double next = trace_dot(b, g);        // Rayleigh quotient
        const double gn = frobenius_norm(g);
        if (gn == 0.0) return 0.0;
        b = g * (1.0 / gn);
        if (iter > 0 && std::abs(next - lambda) <= rel_tol * std::max(next, 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

namespace {

// top eigenvector of the PSD matrix s (small, symmetric) via Jacobi SVD
std::vector<double> top_eigvec(const Matrix& s, double& eigenvalue) {
    const SvdFactors f = svd(s);
    eigenvalue = f.singular_values.empty() ? 0.0 : f.singular_values.front();
    std::vector<double> u(s.rows());
    for (int i = 0; i < s.rows(); ++i) u[i] = f.u(i, 0);
    return u;
}

} // namespace

double phi_max1(const SamplingOperator& op, int restarts, std::uint64_t seed,
                double rel_tol) {
    if (restarts < 1) throw std::invalid_argument("phi_max1: restarts >= 1");
    const int m = op.m();
    const int t = op.t();
    const double inv_n = 1.0 / static_cast<double>(op.n());

    double best = 0.0;
    for (int restart = 0; restart < restarts; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        std::vector<double> v(t);
        double nv = 0.0;
        for (double& x : v) {
            x = rng.gaussian();
            nv += x * x;
        }
        nv = std::sqrt(nv);
        for (double& x : v) x /= nv;

        double objective = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // u-step: top eigenvector of (1/N) sum (X_i v)(X_i v)'
            Matrix su(m, m);
            std::vector<double> w(m);
            for (const Mask& mask : op.masks()) {
                std::fill(w.begin(), w.end(), 0.0);
                if (const auto* p = std::get_if<PointMask>(&mask)) {
                    w[p->row] = v[p->col];
                } else if (const auto* c = std::get_if<ColumnMask>(&mask)) {
                    for (int i = 0; i < m; ++i) w[i] = c->x[i] * v[c->task];
                } else {
                    const auto& d = std::get<DenseMask>(mask).data;
                    for (int i = 0; i < m; ++i) {
                        double s = 0.0;
                        for (int j = 0; j < t; ++j) s += d(i, j) * v[j];
                        w[i] = s;
                    }
                }
                for (int i = 0; i < m; ++i) {
                    if (w[i] == 0.0) continue;
                    for (int j = 0; j <= i; ++j) su(i, j) += w[i] * w[j];
                }
            }
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < i; ++j) su(j, i) = su(i, j);
            su *= inv_n;
            double eig_u = 0.0;
            std::vector<double> u = top_eigvec(su, eig_u);

            // v-step: top eigenvector of (1/N) sum (X_i'u)(X_i'u)'
            Matrix sv(t, t);
            std::vector<double> z(t);
            for (const Mask& mask : op.masks()) {
                std::fill(z.begin(), z.end(), 0.0);
                if (const auto* p = std::get_if<PointMask>(&mask)) {
                    z[p->col] = u[p->row];
                } else if (const auto* c = std::get_if<ColumnMask>(&mask)) {
                    double s = 0.0;
                    for (int i = 0; i < m; ++i) s += c->x[i] * u[i];
                    z[c->task] = s;
                } else {
                    const auto& d = std::get<DenseMask>(mask).data;
                    for (int j = 0; j < t; ++j) {
                        double s = 0.0;
                        for (int i = 0; i < m; ++i) s += d(i, j) * u[i];
                        z[j] = s;
                    }
                }
                for (int i = 0; i < t; ++i) {
                    if (z[i] == 0.0) continue;
                    for (int j = 0; j <= i; ++j) sv(i, j) += z[i] * z[j];
                }
            }
            for (int i = 0; i < t; ++i)
                for (int j = 0; j < i; ++j) sv(j, i) = sv(i, j);
            sv *= inv_n;
            double eig_v = 0.0;
            v = top_eigvec(sv, eig_v);

            const double gain = eig_v - objective;
            objective = std::max(objective, eig_v);
            if (iter > 0 && gain <= rel_tol * std::max(objective, 1e-300)) break;
        }
        best = std::max(best, objective);
    }
    return std::sqrt(best);
}

OperatorReport operator_report(const SamplingOperator& op, int restarts) {
    OperatorReport report;
    report.op_norm = operator_norm(op);
    report.phi_max1 = phi_max1(op, restarts);
    report.c0_estimate = report.op_norm * report.op_norm;
    return report;
}

RIEstimate ri_estimate(const SamplingOperator& op, int r, double nu, int n_samples,
                       std::uint64_t seed) {
    if (r < 1 || r > std::min(op.m(), op.t()))
        throw std::invalid_argument("ri_estimate: r out of range");
    if (!(nu > 0.0)) throw std::invalid_argument("ri_estimate: nu must be positive");

    auto deviation = [&](const Matrix& a) {
        const double fro = frobenius_norm(a);
        if (fro == 0.0) return 0.0;
        double l2sq = 0.0;
        for (double c : apply(op, a)) l2sq += c * c;
        return std::abs(nu * std::sqrt(l2sq) / fro - 1.0);
    };

    double worst = 0.0;
    Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        Matrix g1(op.m(), r), g2(op.t(), r);
        for (double& x : g1.entries()) x = rng.gaussian();
        for (double& x : g2.entries()) x = rng.gaussian();
        worst = std::max(worst, deviation(matmul(g1, g2.transposed())));
    }
    // canonical rank-1 probes catch null-space cells the Gaussian draws miss
    if (r == 1) {
        Matrix e(op.m(), op.t());
        for (int i = 0; i < op.m(); ++i) {
            for (int j = 0; j < op.t(); ++j) {
                e(i, j) = 1.0;
                worst = std::max(worst, deviation(e));
                e(i, j) = 0.0;
            }
        }
    }
    return RIEstimate{r, nu, worst, n_samples};
}

double dispersion_kappa(const SamplingOperator& op, int r) {
    if (!op.all_point()) throw std::invalid_argument("dispersion_kappa: point masks only");
    if (r < 1) throw std::invalid_argument("dispersion_kappa: r >= 1");

    std::set<std::pair<int, int>> cells;
    for (const Mask& mask : op.masks()) {
        const auto& p = std::get<PointMask>(mask);
        cells.insert({p.row, p.col});
    }
    std::vector<long> col_count(op.t(), 0), row_count(op.m(), 0);
    for (const auto& [row, col] : cells) {
        ++row_count[row];
        ++col_count[col];
    }
    auto top_r_sum = [&](std::vector<long> counts) {
        std::sort(counts.begin(), counts.end(), std::greater<>());
        long s = 0;
        for (int i = 0; i < r && i < static_cast<int>(counts.size()); ++i) s += counts[i];
        return s;
    };
    const long c = std::max(top_r_sum(col_count), top_r_sum(row_count));
    const double big_m = static_cast<double>(std::max(op.m(), op.t()));
    const double kappa = (static_cast<double>(c) - 1.0) / (big_m * r);
    if (kappa <= 0.0) return 0.0;
    return std::min(kappa, 1.0);
}

std::vector<std::pair<double, double>> gram_spectra(const SamplingOperator& op,
                                                    int n_per_task) {
    if (!op.all_column()) throw std::invalid_argument("gram_spectra: column masks only");
    if (n_per_task < 1) throw std::invalid_argument("gram_spectra: n_per_task >= 1");

    std::map<int, std::vector<const ColumnMask*>> by_task;
    for (const Mask& mask : op.masks())
        by_task[std::get<ColumnMask>(mask).task].push_back(&std::get<ColumnMask>(mask));
    if (static_cast<int>(by_task.size()) != op.t())
        throw std::invalid_argument("gram_spectra: tasks with no masks");
    for (const auto& [task, list] : by_task)
        if (static_cast<int>(list.size()) != n_per_task)
            throw std::invalid_argument("gram_spectra: unbalanced tasks");

    std::vector<std::pair<double, double>> out;
    out.reserve(op.t());
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_per_task));
    for (int task = 0; task < op.t(); ++task) {
        // eigs of Psi_t are the squared singular values of the stacked
        // predictor matrix divided by n
        Matrix stacked(n_per_task, op.m());
        int row = 0;
        for (const ColumnMask* cm : by_task[task]) {
            for (int i = 0; i < op.m(); ++i) stacked(row, i) = cm->x[i] * inv_sqrt_n;
            ++row;
        }
        const SvdFactors f = svd(stacked);
        double max_eig = 0.0;
        double min_eig = 0.0;
        if (!f.singular_values.empty()) {
            max_eig = f.singular_values.front() * f.singular_values.front();
            min_eig = f.singular_values.back() * f.singular_values.back();
        }
        if (n_per_task < op.m()) min_eig = 0.0; // rank-deficient Gram
        out.emplace_back(min_eig, max_eig);
    }
    return out;
}

} // namespace lrm
