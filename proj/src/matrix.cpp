#include "lrm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lrm {

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("Matrix: entry count does not match rows*cols");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(std::span<const double> values) {
    const int n = static_cast<int>(values.size());
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows.front().size());
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw std::invalid_argument("Matrix::from_rows: ragged rows");
        for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

bool Matrix::is_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw std::invalid_argument("Matrix +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw std::invalid_argument("Matrix -=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double scalar) {
    for (double& x : data_) x *= scalar;
    return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

double trace_dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("trace_dot: shape mismatch");
    const auto ea = a.entries();
    const auto eb = b.entries();
    double s = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) s += ea[i] * eb[i];
    return s;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.entries()) s += x * x;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double x : a.entries()) m = std::max(m, std::abs(x));
    return m;
}

Matrix SvdFactors::reconstruct() const {
    const int k = static_cast<int>(singular_values.size());
    Matrix us = u;
    for (int i = 0; i < us.rows(); ++i)
        for (int j = 0; j < k; ++j) us(i, j) *= singular_values[j];
    return matmul(us, v.transposed());
}

namespace {

// One-sided Jacobi on a tall (rows >= cols) work matrix: rotate column pairs
// until all Gram cross terms vanish, then sigma_j = |col_j|, u_j = col_j /
// sigma_j and v accumulates the rotations.
SvdFactors svd_tall(const Matrix& input) {
    const int m = input.rows();
    const int n = input.cols();
    Matrix w = input;
    Matrix v = Matrix::identity(n);

    auto col_dot = [&](int p, int q) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += w(i, p) * w(i, q);
        return s;
    };

    const double tiny = std::numeric_limits<double>::min();
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double app = col_dot(p, p);
                const double aqq = col_dot(q, q);
                const double apq = col_dot(p, q);
                if (std::abs(apq) <= 1e-14 * std::sqrt(app * aqq) + tiny) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double wp = w(i, p);
                    const double wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sigma[a] > sigma[b]; });

    const double clamp = sigma.empty() ? 0.0 : 1e-13 * sigma[order.front()];

    SvdFactors f;
    f.singular_values.resize(n);
    f.u = Matrix(m, n);
    f.v = Matrix(n, n);
    int deficient_from = n;
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        double s = sigma[src];
        if (s <= clamp) s = 0.0;
        f.singular_values[j] = s;
        for (int i = 0; i < n; ++i) f.v(i, j) = v(i, src);
        if (s > 0.0) {
            for (int i = 0; i < m; ++i) f.u(i, j) = w(i, src) / sigma[src];
        } else if (deficient_from == n) {
            deficient_from = j;
        }
    }

    // complete u with an orthonormal basis for the zero singular values
    if (deficient_from < n) {
        int cursor = 0;
        for (int j = deficient_from; j < n; ++j) {
            while (cursor < m) {
                std::vector<double> cand(m, 0.0);
                cand[cursor++] = 1.0;
                for (int k = 0; k < j; ++k) {
                    double dot = 0.0;
                    for (int i = 0; i < m; ++i) dot += cand[i] * f.u(i, k);
                    for (int i = 0; i < m; ++i) cand[i] -= dot * f.u(i, k);
                }
                double norm = 0.0;
                for (double x : cand) norm += x * x;
                norm = std::sqrt(norm);
                if (norm > 1e-8) {
                    for (int i = 0; i < m; ++i) f.u(i, j) = cand[i] / norm;
                    break;
                }
            }
        }
    }
    return f;
}

} // namespace

SvdFactors svd(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("svd: empty matrix");
    if (!a.is_finite()) throw std::invalid_argument("svd: non-finite input");
    if (a.rows() >= a.cols()) return svd_tall(a);
    SvdFactors f = svd_tall(a.transposed());
    std::swap(f.u, f.v);
    return f;
}

double schatten(std::span<const double> singular_values, double p) {
    if (std::isinf(p) && p > 0.0)
        return singular_values.empty() ? 0.0 : singular_values.front();
    if (!(p > 0.0)) throw std::invalid_argument("schatten: p must be positive");
    double s = 0.0;
    for (double x : singular_values) {
        if (x > 0.0) s += std::pow(x, p);
    }
    return std::pow(s, 1.0 / p);
}

double schatten(const Matrix& a, double p) {
    if (std::isinf(p) && p < 0.0) throw std::invalid_argument("schatten: p must be positive");
    if (!std::isinf(p) && !(p > 0.0))
        throw std::invalid_argument("schatten: p must be positive");
    const SvdFactors f = svd(a);
    return schatten(f.singular_values, p);
}

int numerical_rank(const Matrix& a, double tol) {
    if (tol < 0.0) throw std::invalid_argument("numerical_rank: tol must be >= 0");
    const SvdFactors f = svd(a);
    if (f.singular_values.empty() || f.singular_values.front() == 0.0) return 0;
    const double threshold = tol * f.singular_values.front();
    int r = 0;
    for (double s : f.singular_values)
        if (s > threshold) ++r;
    return r;
}

RankSplit rank_split(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("rank_split: dimension mismatch");
    if (!a.is_finite() || !b.is_finite())
        throw std::invalid_argument("rank_split: non-finite input");

    const SvdFactors f = svd(a);
    int r = 0;
    const double thr =
        f.singular_values.empty() ? 0.0 : 1e-9 * f.singular_values.front();
    for (double s : f.singular_values)
        if (s > thr) ++r;

    // b2 = (I - P_u) b (I - P_v) with P_u, P_v the projectors onto the
    // column/row spaces of a; equivalent to the block form in the u,v basis.
    Matrix ur(a.rows(), r), vr(a.cols(), r);
    for (int j = 0; j < r; ++j) {
        for (int i = 0; i < a.rows(); ++i) ur(i, j) = f.u(i, j);
        for (int i = 0; i < a.cols(); ++i) vr(i, j) = f.v(i, j);
    }
    const Matrix pu_b = matmul(ur, matmul(ur.transposed(), b));   // P_u b
    const Matrix rem = b - pu_b;                                  // (I-P_u) b
    const Matrix b2 = rem - matmul(matmul(rem, vr), vr.transposed());

    RankSplit split;
    split.b1 = b - b2;
    split.b2 = b2;
    return split;
}

} // namespace lrm
