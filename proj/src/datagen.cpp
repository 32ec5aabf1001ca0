#include "lrm/datagen.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lrm/rng.hpp"

namespace lrm {

NoiseModel NoiseModel::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel: sigma must be > 0");
    return NoiseModel{NoiseKind::Gaussian, sigma, 0.0};
}

NoiseModel NoiseModel::bounded_bernstein(double sigma, double h) {
    if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel: sigma must be > 0");
    // xi = sigma * Rademacher has E|xi|^l = sigma^l; verify the Bernstein
    // moment condition for l = 2..8 with the given (sigma, H)
    double factorial = 2.0;
    for (int l = 2; l <= 8; ++l) {
        if (l > 2) factorial *= l;
        const double lhs = std::pow(sigma, l);
        const double rhs = 0.5 * factorial * sigma * sigma * std::pow(h, l - 2);
        if (lhs > rhs * (1.0 + 1e-12))
            throw std::invalid_argument(
                "NoiseModel: (sigma, H) violate the Bernstein condition; need H >= sigma");
    }
    return NoiseModel{NoiseKind::BoundedBernstein, sigma, h};
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Usr: return "usr";
        case Scenario::Cs: return "cs";
        case Scenario::Multitask: return "multitask";
        case Scenario::GaussianDense: return "gaussian_dense";
    }
    return "usr";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "usr") return Scenario::Usr;
    if (name == "cs") return Scenario::Cs;
    if (name == "multitask") return Scenario::Multitask;
    if (name == "gaussian_dense") return Scenario::GaussianDense;
    throw std::invalid_argument("unknown scenario: " + name);
}

GroundTruth gen_ground_truth(int m, int t, int r, double spectral_scale,
                             std::uint64_t seed) {
    if (m < 1 || t < 1) throw std::invalid_argument("gen_ground_truth: bad dims");
    if (r < 0 || r > std::min(m, t))
        throw std::invalid_argument("gen_ground_truth: r out of range");
    GroundTruth truth;
    truth.r = r;
    truth.spectral_scale = spectral_scale;
    if (r == 0) {
        truth.a_star = Matrix(m, t);
        return truth;
    }
    Rng rng(seed);
    Matrix g1(m, r), g2(t, r);
    for (double& x : g1.entries()) x = rng.gaussian();
    for (double& x : g2.entries()) x = rng.gaussian();
    Matrix a = matmul(g1, g2.transposed());
    if (spectral_scale > 0.0) {
        const double top = schatten(a, std::numeric_limits<double>::infinity());
        if (top > 0.0) a *= spectral_scale / top;
    }
    truth.a_star = std::move(a);
    return truth;
}

SamplingOperator gen_masks(Scenario scenario, int m, int t, int n_or_big_n,
                           std::uint64_t seed) {
    if (m < 1 || t < 1) throw std::invalid_argument("gen_masks: bad dims");
    if (n_or_big_n < 1) throw std::invalid_argument("gen_masks: need at least one mask");
    Rng rng(seed);
    std::vector<Mask> masks;

    switch (scenario) {
        case Scenario::Usr: {
            masks.reserve(n_or_big_n);
            for (int i = 0; i < n_or_big_n; ++i) {
                const auto cell = rng.uniform_int(static_cast<std::uint64_t>(m) * t);
                masks.push_back(PointMask{static_cast<int>(cell / t),
                                          static_cast<int>(cell % t)});
            }
            break;
        }
        case Scenario::Cs: {
            const long total = static_cast<long>(m) * t;
            if (n_or_big_n > total)
                throw std::invalid_argument("gen_masks: CS requires N <= mT");
            std::vector<long> cells(total);
            std::iota(cells.begin(), cells.end(), 0L);
            for (int i = 0; i < n_or_big_n; ++i) {
                const auto j = i + rng.uniform_int(static_cast<std::uint64_t>(total - i));
                std::swap(cells[i], cells[j]);
            }
            masks.reserve(n_or_big_n);
            for (int i = 0; i < n_or_big_n; ++i)
                masks.push_back(PointMask{static_cast<int>(cells[i] / t),
                                          static_cast<int>(cells[i] % t)});
            break;
        }
        case Scenario::Multitask: {
            masks.reserve(static_cast<std::size_t>(n_or_big_n) * t);
            for (int task = 0; task < t; ++task) {
                for (int s = 0; s < n_or_big_n; ++s) {
                    ColumnMask cm;
                    cm.task = task;
                    cm.x.resize(m);
                    for (double& x : cm.x) x = rng.gaussian();
                    masks.push_back(std::move(cm));
                }
            }
            break;
        }
        case Scenario::GaussianDense: {
            masks.reserve(n_or_big_n);
            for (int i = 0; i < n_or_big_n; ++i) {
                DenseMask dm{Matrix(m, t)};
                for (double& x : dm.data.entries()) x = rng.gaussian();
                masks.push_back(std::move(dm));
            }
            break;
        }
    }
    return SamplingOperator(m, t, std::move(masks));
}

std::vector<double> draw_noise(const NoiseModel& noise, int n, std::uint64_t seed) {
    std::vector<double> xi(n, 0.0);
    if (noise.kind == NoiseKind::None) return xi;
    Rng rng(seed);
    if (noise.kind == NoiseKind::Gaussian) {
        for (double& x : xi) x = noise.sigma * rng.gaussian();
    } else {
        for (double& x : xi) x = noise.sigma * rng.rademacher();
    }
    return xi;
}

Dataset gen_dataset(const GroundTruth& truth, SamplingOperator op,
                    const NoiseModel& noise, std::uint64_t seed,
                    Scenario scenario, int n_per_task) {
    if (truth.a_star.rows() != op.m() || truth.a_star.cols() != op.t())
        throw std::invalid_argument("gen_dataset: dims incompatible");
    const int n = op.n();
    std::vector<double> y(n);
    const std::vector<double> xi = draw_noise(noise, n, seed);
    for (int i = 0; i < n; ++i)
        y[i] = mask_response(op.masks()[i], truth.a_star) + xi[i];
    Dataset data{std::move(op), std::move(y), truth, noise, seed, scenario, n_per_task};
    return data;
}

} // namespace lrm
