#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrm/calibration.hpp"
#include "lrm/datagen.hpp"
#include "lrm/matrix.hpp"
#include "lrm/sampling.hpp"
#include "lrm/solver.hpp"

namespace lrm {

/// |L(a_hat - a_star)|_2^2, the in-sample prediction error.
double prediction_error(const SamplingOperator& op, const Matrix& a_hat,
                        const Matrix& a_star);

/// Spectral norm of the noise matrix N^-1 sum_i xi_i X_i (note the N^-1
/// scaling, distinct from the adjoint's N^-1/2).
double noise_matrix_norm(const SamplingOperator& op, std::span<const double> xi);

/// |a_hat - a_star|_{S_q}^q
double schatten_error(const Matrix& a_hat, const Matrix& a_star, double q);

struct ErrorReport {
    double pred_sq = 0.0;
    std::map<double, double> schatten_q;
    double frob_per_entry = 0.0;
    int rank_hat = 0;
};

ErrorReport error_report(const SamplingOperator& op, const Matrix& a_hat,
                         const Matrix& a_star, const std::vector<double>& q_list = {1.0,
                                                                                    2.0});

/// One bound comparison. For bounds whose constants the source analysis
/// leaves nonconstructive, rhs is the rate factor and `holds` is absent;
/// `ratio` always carries lhs / rhs.
struct BoundCheck {
    std::string bound_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::optional<bool> holds;
};

/// bound_id in {thm1, usr_s1, cs_s1, thm4i, mt_ri}. thm1 evaluates
/// 16 tau |A*|_p^p with tau taken from `thm1_tau` (default tau1).
BoundCheck bound_check(const std::string& bound_id, const Dataset& data,
                       const FitResult& fit, const CalibrationParams& params,
                       double p = 1.0, BoundTag thm1_tau = BoundTag::Tau1);

/// Noise realization xi_i = y_i - trace(X_i' A*); requires ground truth.
std::vector<double> noise_realization(const Dataset& data);

/// Slack by which the basic inequality holds (negative values mean it is
/// satisfied): lhs - rhs for
/// d^2 <= (2/N) sum xi_i tr((a_hat - A*)'X_i) + lambda(|A*|_p^p - |a_hat|_p^p).
double basic_inequality_gap(const Dataset& data, const Matrix& a_hat, double p,
                            double lambda);

} // namespace lrm
