#include "lrm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrm {

namespace {

void check_params(const ProxParams& params) {
    if (!(params.p > 0.0) || params.p > 1.0)
        throw std::invalid_argument("ProxParams: need 0 < p <= 1");
    if (!(params.lambda >= 0.0)) throw std::invalid_argument("ProxParams: lambda >= 0");
    if (!(params.eta > 0.0)) throw std::invalid_argument("ProxParams: eta > 0");
}

} // namespace

double scalar_prox(double sigma_in, const ProxParams& params) {
    check_params(params);
    if (!(sigma_in >= 0.0) || !std::isfinite(sigma_in))
        throw std::invalid_argument("scalar_prox: sigma must be finite and >= 0");

    const double le = params.lambda * params.eta;
    if (le == 0.0) return sigma_in;
    const double p = params.p;
    if (p == 1.0) return std::max(sigma_in - le, 0.0);
    if (sigma_in == 0.0) return 0.0;

    // below x_bar the stationarity equation has no root; below the sigma
    // threshold t_star the zero solution is global
    const double x_bar = std::pow(2.0 * le * (1.0 - p), 1.0 / (2.0 - p));
    const double t_star = x_bar + le * p * std::pow(x_bar, p - 1.0);
    if (sigma_in <= t_star) return 0.0;

    auto residual = [&](double x) { return x - sigma_in + le * p * std::pow(x, p - 1.0); };

    // Newton from x0 = sigma, bisection fallback on [x_bar, sigma]
    double lo = x_bar, hi = sigma_in;
    double x = sigma_in;
    for (int iter = 0; iter < 200; ++iter) {
        const double g = residual(x);
        if (std::abs(g) <= 1e-12 * std::max(1.0, sigma_in)) break;
        if (g > 0.0)
            hi = x;
        else
            lo = x;
        const double dg = 1.0 + le * p * (p - 1.0) * std::pow(x, p - 2.0);
        double next = (dg > 0.0) ? x - g / dg : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }

    const double obj_root =
        (x - sigma_in) * (x - sigma_in) / (2.0 * params.eta) +
        params.lambda * std::pow(x, p);
    const double obj_zero = sigma_in * sigma_in / (2.0 * params.eta);
    return obj_root < obj_zero ? x : 0.0;
}

Matrix matrix_prox(const Matrix& z, const ProxParams& params) {
    check_params(params);
    if (!z.is_finite()) throw std::invalid_argument("matrix_prox: non-finite input");
    if (params.lambda == 0.0) return z;

    SvdFactors f = svd(z);
    for (double& s : f.singular_values) s = scalar_prox(s, params);
    return f.reconstruct();
}

} // namespace lrm
