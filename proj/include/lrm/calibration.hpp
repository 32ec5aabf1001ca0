#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace lrm {

/// Inputs to the effective-noise-level formulas. Fields default to NaN (or 0
/// for the integer counts); a formula that needs an unset field raises a
/// configuration error.
struct CalibrationParams {
    double sigma = nan();      // noise scale
    double d_conf = nan();     // confidence parameter D (>= 2 where required)
    double h = nan();          // Bernstein H
    double b_conf = nan();     // light-tail B
    double a_conf = nan();     // Tropp parameter A (> 1)
    double theta_conf = nan(); // vartheta for the nonconvex bound
    double c_star = nan();     // spectral-growth exponent C*
    int m = 0;
    int t = 0;
    long n_obs = 0;
    double p = nan();
    double phi_max1 = nan();
    double s_row = nan(), h_row = nan();
    double s_col = nan(), h_col = nan();
    double gram_max_cross = nan(); // max of |sum X'X|^(1/2), |sum XX'|^(1/2)

    static constexpr double nan() { return std::numeric_limits<double>::quiet_NaN(); }
};

enum class BoundTag {
    Tau1,
    Tau2,
    Tau3,
    Tau4,
    Tau5,
    Tau6,
    Tau7,
    TauRow,
    TauCol,
    Thm4i,
};

std::string bound_name(BoundTag tag);
BoundTag bound_from_name(const std::string& name);

struct ConfigurationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Effective noise level tau for the selected high-probability bound on the
/// spectral norm of the noise matrix (or on the stochastic term for Tau7).
double effective_noise(BoundTag tag, const CalibrationParams& params);

/// lambda = 4 tau, except Thm4i which uses its own displayed constant
/// 32 sigma phi_max(1) sqrt((m+T)/N).
double lambda_auto(BoundTag tag, const CalibrationParams& params);

/// p = 1 / log(N / max(m,t)); requires N > e * max(m,t).
double p_auto(long n_obs, int m, int t);

/// Rank-inflation constants from the restricted-isometry analysis:
/// a(p) = min{k in N : k > (6^(1/p)/sqrt 2)^(2p/(2-p))} and
/// delta_0(p) = (1 - 3^(1/p) (a/2)^(1/2 - 1/p)) / 2.
std::pair<int, double> ri_inflation(double p);

} // namespace lrm
