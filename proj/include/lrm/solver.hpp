#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lrm/calibration.hpp"
#include "lrm/datagen.hpp"
#include "lrm/matrix.hpp"

namespace lrm {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class StepMode { Fixed, Backtracking };

/// Regularization: an explicit lambda or lambda = 4 tau from a calibration
/// bound (phi_max1 is measured on the operator when the bound needs it and
/// the field is unset).
struct LambdaSpec {
    bool is_auto = false;
    double value = 0.0;
    BoundTag tag = BoundTag::Tau1;
    CalibrationParams params;

    static LambdaSpec explicit_value(double lambda) {
        LambdaSpec s;
        s.value = lambda;
        return s;
    }
    static LambdaSpec auto_bound(BoundTag tag, CalibrationParams params) {
        LambdaSpec s;
        s.is_auto = true;
        s.tag = tag;
        s.params = std::move(params);
        return s;
    }
};

struct EstimatorConfig {
    double p = 1.0;
    LambdaSpec lambda;
    int max_iters = 5000;
    double rel_tol = 1e-9;
    int restarts = 5; // p < 1 only
    StepMode step = StepMode::Fixed;
    std::uint64_t seed = 0;
    // test hook: guarantees objective(a_hat) <= objective(a_star) for p < 1
    // by adding the ground truth as a warm start when available
    bool warm_start_truth = false;
};

struct FitResult {
    Matrix a_hat;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double lambda_used = 0.0;
    std::vector<double> objective_trace;
};

/// (1/N) sum_i (y_i - trace(X_i'a))^2 + lambda |a|_{S_p}^p
double objective(const Dataset& data, const Matrix& a, double p, double lambda);

/// The Schatten-p estimator: accelerated proximal gradient for p = 1
/// (momentum restart on objective increase), multi-start plain proximal
/// gradient for p < 1. Fixed-step mode keeps the objective trace monotone.
FitResult fit(const Dataset& data, const EstimatorConfig& config);

/// Closed-form solution on a complete CS design (N = mT, every cell once):
/// the prox of the assembled data matrix with effective step eta = N/2.
Matrix closed_form_complete(const Dataset& data, double p, double lambda);

/// True when the design observes every cell exactly once.
bool is_complete_design(const Dataset& data);

/// Resolve the lambda value a config implies for a dataset, filling unset
/// calibration fields from the data (dims, sigma, H, the estimator's p) and
/// measuring phi_max1 if the bound requires it.
double resolve_lambda(const Dataset& data, const LambdaSpec& spec,
                      double estimator_p = CalibrationParams::nan());

} // namespace lrm
