#include "lrm/calibration.hpp"

#include <cmath>
#include <stdexcept>

namespace lrm {

namespace {

double need(double value, const char* field) {
    if (std::isnan(value))
        throw ConfigurationError(std::string("calibration: missing field ") + field);
    return value;
}

long need_n(long n) {
    if (n < 1) throw ConfigurationError("calibration: missing N");
    return n;
}

int need_dim(int v, const char* field) {
    if (v < 1) throw ConfigurationError(std::string("calibration: missing ") + field);
    return v;
}

} // namespace

std::string bound_name(BoundTag tag) {
    switch (tag) {
        case BoundTag::Tau1: return "tau1";
        case BoundTag::Tau2: return "tau2";
        case BoundTag::Tau3: return "tau3";
        case BoundTag::Tau4: return "tau4";
        case BoundTag::Tau5: return "tau5";
        case BoundTag::Tau6: return "tau6";
        case BoundTag::Tau7: return "tau7";
        case BoundTag::TauRow: return "tau_row";
        case BoundTag::TauCol: return "tau_col";
        case BoundTag::Thm4i: return "thm4i";
    }
    return "tau1";
}

BoundTag bound_from_name(const std::string& name) {
    if (name == "tau1") return BoundTag::Tau1;
    if (name == "tau2") return BoundTag::Tau2;
    if (name == "tau3") return BoundTag::Tau3;
    if (name == "tau4") return BoundTag::Tau4;
    if (name == "tau5") return BoundTag::Tau5;
    if (name == "tau6") return BoundTag::Tau6;
    if (name == "tau7") return BoundTag::Tau7;
    if (name == "tau_row") return BoundTag::TauRow;
    if (name == "tau_col") return BoundTag::TauCol;
    if (name == "thm4i") return BoundTag::Thm4i;
    throw ConfigurationError("unknown bound tag: " + name);
}

double effective_noise(BoundTag tag, const CalibrationParams& params) {
    const double n = static_cast<double>(need_n(params.n_obs));
    const int m = need_dim(params.m, "m");
    const int t = need_dim(params.t, "T");
    const double mt_sum = static_cast<double>(m) + t;
    const double big_m = static_cast<double>(std::max(m, t));

    switch (tag) {
        case BoundTag::Tau1: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            const double phi = need(params.phi_max1, "phi_max1");
            return 4.0 * std::sqrt(2.0 * d) * sigma * phi * std::sqrt(mt_sum / n);
        }
        case BoundTag::Tau2: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            const double h = need(params.h, "H");
            return (4.0 * sigma * std::sqrt(10.0 * d) + 8.0 * h * d) * mt_sum / n;
        }
        case BoundTag::Tau3: {
            const double sigma = need(params.sigma, "sigma");
            const double b = need(params.b_conf, "B");
            return std::sqrt(b) * sigma *
                   std::log(static_cast<double>(std::max(m + 1, t + 1))) / std::sqrt(n);
        }
        case BoundTag::Tau4: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            return 8.0 * sigma * std::sqrt(d) * std::sqrt(mt_sum) / n;
        }
        case BoundTag::Tau5: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            const double h = need(params.h, "H");
            return (4.0 * sigma * std::sqrt(2.0 * d * mt_sum) + 8.0 * h * d * mt_sum) / n;
        }
        case BoundTag::Tau6: {
            const double sigma = need(params.sigma, "sigma");
            const double a = need(params.a_conf, "A");
            const double cross = need(params.gram_max_cross, "gram_max_cross");
            return sigma * std::sqrt(2.0 * a * std::log(mt_sum)) / n * cross;
        }
        case BoundTag::Tau7: {
            const double theta = need(params.theta_conf, "theta");
            const double p = need(params.p, "p");
            if (!(p > 0.0) || p >= 1.0)
                throw ConfigurationError("tau7: requires 0 < p < 1 (kappa undefined at p=1)");
            const double kappa = (2.0 - p) / (2.0 - 2.0 * p);
            const double c_kappa =
                (2.0 * kappa - 1.0) * (2.0 * kappa) * std::pow(kappa, -1.0 / (2.0 * kappa - 1.0));
            return c_kappa * std::pow(theta / p, 1.0 - p / 2.0) *
                   std::pow(big_m / n, 1.0 - p / 2.0);
        }
        case BoundTag::TauRow: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            const double h = need(params.h, "H");
            const double s_row = need(params.s_row, "S_row");
            const double h_row = need(params.h_row, "H_row");
            const double log_m = std::log(static_cast<double>(m));
            const double c_row = std::sqrt(2.0 * d * sigma * sigma * s_row * s_row) +
                                 2.0 * d * h_row * h * std::sqrt(log_m / n);
            return c_row * std::sqrt(m * log_m / n);
        }
        case BoundTag::TauCol: {
            const double sigma = need(params.sigma, "sigma");
            const double d = need(params.d_conf, "D");
            const double h = need(params.h, "H");
            const double s_col = need(params.s_col, "S_col");
            const double h_col = need(params.h_col, "H_col");
            const double log_t = std::log(static_cast<double>(t));
            const double c_col = std::sqrt(2.0 * d * sigma * sigma * s_col * s_col) +
                                 2.0 * d * h_col * h * std::sqrt(log_t / n);
            return c_col * std::sqrt(t * log_t / n);
        }
        case BoundTag::Thm4i: {
            // no tau of its own; lambda_auto handles the displayed constant
            const double sigma = need(params.sigma, "sigma");
            const double phi = need(params.phi_max1, "phi_max1");
            return 8.0 * sigma * phi * std::sqrt(mt_sum / n);
        }
    }
    throw ConfigurationError("effective_noise: unhandled tag");
}

double lambda_auto(BoundTag tag, const CalibrationParams& params) {
    if (tag == BoundTag::Thm4i) {
        const double n = static_cast<double>(need_n(params.n_obs));
        const double sigma = need(params.sigma, "sigma");
        const double phi = need(params.phi_max1, "phi_max1");
        const double mt_sum = static_cast<double>(need_dim(params.m, "m")) +
                              need_dim(params.t, "T");
        return 32.0 * sigma * phi * std::sqrt(mt_sum / n);
    }
    return 4.0 * effective_noise(tag, params);
}

double p_auto(long n_obs, int m, int t) {
    if (m < 1 || t < 1 || n_obs < 1) throw std::invalid_argument("p_auto: bad dims");
    const double big_m = static_cast<double>(std::max(m, t));
    const double n = static_cast<double>(n_obs);
    if (!(n > std::exp(1.0) * big_m))
        throw std::invalid_argument("p_auto: requires N > e * max(m,T)");
    return 1.0 / std::log(n / big_m);
}

std::pair<int, double> ri_inflation(double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("ri_inflation: need 0 < p <= 1");
    double threshold = std::pow(std::pow(6.0, 1.0 / p) / std::sqrt(2.0),
                                2.0 * p / (2.0 - p));
    // resolve near-integer thresholds exactly: k must be strictly greater
    const double rounded = std::round(threshold);
    if (std::abs(threshold - rounded) < 1e-9 * std::max(1.0, rounded)) threshold = rounded;
    const int a = static_cast<int>(std::floor(threshold)) + 1;
    const double delta0 =
        0.5 * (1.0 - std::pow(3.0, 1.0 / p) * std::pow(a / 2.0, 0.5 - 1.0 / p));
    return {a, delta0};
}

} // namespace lrm
