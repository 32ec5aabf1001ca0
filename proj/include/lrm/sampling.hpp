#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "lrm/matrix.hpp"

namespace lrm {

/// Point mask e_row e_col': a single observed entry.
struct PointMask {
    int row = 0;
    int col = 0;
};

/// Column mask: predictor vector x placed in column `task`, zero elsewhere.
struct ColumnMask {
    int task = 0;
    std::vector<double> x;
};

/// Fully dense mask.
struct DenseMask {
    Matrix data;
};

using Mask = std::variant<PointMask, ColumnMask, DenseMask>;

/// The sampling operator A -> (trace(X_1'A), ..., trace(X_N'A)) / sqrt(N).
class SamplingOperator {
  public:
    SamplingOperator(int m, int t, std::vector<Mask> masks);

    int m() const { return m_; }
    int t() const { return t_; }
    int n() const { return static_cast<int>(masks_.size()); }
    const std::vector<Mask>& masks() const { return masks_; }

    bool all_point() const;
    bool all_column() const;

  private:
    int m_;
    int t_;
    std::vector<Mask> masks_;
};

double mask_response(const Mask& mask, const Matrix& a);
void mask_accumulate(const Mask& mask, double weight, Matrix& into);

std::vector<double> apply(const SamplingOperator& op, const Matrix& a);
Matrix adjoint(const SamplingOperator& op, std::span<const double> z);

/// sup |L(A)|_2 / |A|_F via power iteration on A -> adjoint(apply(A)).
double operator_norm(const SamplingOperator& op, double rel_tol = 1e-10,
                     int max_iters = 10000);

/// Maximal rank-1 restricted eigenvalue: sup over unit u, v of
/// sqrt((1/N) sum_i (u'X_i v)^2), by alternating eigen-updates from
/// `restarts` random starts. A certified lower bound of the true sup.
/// rel_tol stops a restart once the relative per-alternation gain of the
/// (monotone) objective falls below it.
double phi_max1(const SamplingOperator& op, int restarts = 8,
                std::uint64_t seed = 0x0f171cb1u, double rel_tol = 1e-10);

struct OperatorReport {
    double phi_max1 = 0.0;
    double op_norm = 0.0;
    double c0_estimate = 0.0; // op_norm^2, the uniform-boundedness constant
};

OperatorReport operator_report(const SamplingOperator& op, int restarts = 8);

/// Monte Carlo probe of the restricted isometry quality: max deviation
/// |nu * |L(A)|_2 - 1| over sampled unit-Frobenius rank-r matrices. A lower
/// bound on the true delta_r, recorded as advisory only.
struct RIEstimate {
    int r = 0;
    double nu = 0.0;
    double delta_hat = 0.0;
    int n_samples = 0;
};

RIEstimate ri_estimate(const SamplingOperator& op, int r, double nu, int n_samples,
                       std::uint64_t seed);

/// Largest kappa in (0,1] with kappa*max(m,T)*r + 1 <= c, where c is the
/// best observed-cell count over the r most-observed columns or rows;
/// 0 when no kappa qualifies. Point masks only.
double dispersion_kappa(const SamplingOperator& op, int r);

/// Eigenvalue range (min, max) of each task Gram matrix
/// Psi_t = n^-1 sum_s x^(t,s) x^(t,s)'. Column masks only, balanced tasks.
std::vector<std::pair<double, double>> gram_spectra(const SamplingOperator& op,
                                                    int n_per_task);

} // namespace lrm
