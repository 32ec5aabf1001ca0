#pragma once

#include "lrm/matrix.hpp"

namespace lrm {

/// Parameters of the Schatten-p penalty prox: 0 < p <= 1, penalty weight
/// lambda >= 0 and smooth step eta > 0.
struct ProxParams {
    double p = 1.0;
    double lambda = 0.0;
    double eta = 1.0;
};

/// Global minimizer of min_{x >= 0} (x - sigma)^2 / (2 eta) + lambda x^p.
/// p = 1 is plain soft-thresholding; p < 1 uses the closed-form threshold
/// plus a safeguarded Newton solve of x - sigma + lambda eta p x^(p-1) = 0,
/// resolved against x = 0 by direct objective comparison.
double scalar_prox(double sigma_in, const ProxParams& params);

/// Exact prox of the Schatten-p penalty: soft/p-shrinkage of the singular
/// values of z (the subproblem separates across singular values).
Matrix matrix_prox(const Matrix& z, const ProxParams& params);

} // namespace lrm
