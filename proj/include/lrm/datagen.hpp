#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lrm/matrix.hpp"
#include "lrm/sampling.hpp"

namespace lrm {

/// Synthetic target matrix of known rank with a prescribed top singular value.
struct GroundTruth {
    Matrix a_star;
    int r = 0;
    double spectral_scale = 1.0;
};

enum class NoiseKind { Gaussian, BoundedBernstein, None };

/// Noise models: Gaussian(sigma), or sigma * Rademacher which satisfies the
/// Bernstein moment condition E|xi|^l <= l! sigma^2 H^(l-2) / 2 for any
/// H >= sigma (checked at construction). `None` produces noiseless data.
struct NoiseModel {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 1.0;
    double h = 1.0; // Bernstein H, BoundedBernstein only

    static NoiseModel gaussian(double sigma);
    static NoiseModel bounded_bernstein(double sigma, double h);
    static NoiseModel none() { return NoiseModel{NoiseKind::None, 0.0, 0.0}; }
};

enum class Scenario { Usr, Cs, Multitask, GaussianDense };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

/// Masks + responses, plus the ground truth when synthetic.
struct Dataset {
    SamplingOperator op;
    std::vector<double> y;
    std::optional<GroundTruth> truth;
    NoiseModel noise;
    std::uint64_t seed = 0;
    Scenario scenario = Scenario::Usr;
    int n_per_task = 0; // multitask only

    int m() const { return op.m(); }
    int t() const { return op.t(); }
    int n() const { return op.n(); }
};

/// A* = G1 G2' with standard normal factors, rescaled so sigma_1 equals
/// spectral_scale (r = 0 gives the zero matrix).
GroundTruth gen_ground_truth(int m, int t, int r, double spectral_scale,
                             std::uint64_t seed);

/// USR: n_or_big_n i.i.d. uniform point masks (with replacement).
/// CS: n_or_big_n distinct point masks, uniform without replacement.
/// Multitask: n_or_big_n column masks per task, standard normal predictors.
/// GaussianDense: n_or_big_n dense masks with i.i.d. standard normal entries,
/// which makes the operator approximately a restricted isometry with nu = 1.
SamplingOperator gen_masks(Scenario scenario, int m, int t, int n_or_big_n,
                           std::uint64_t seed);

Dataset gen_dataset(const GroundTruth& truth, SamplingOperator op,
                    const NoiseModel& noise, std::uint64_t seed,
                    Scenario scenario, int n_per_task = 0);

std::vector<double> draw_noise(const NoiseModel& noise, int n, std::uint64_t seed);

} // namespace lrm
