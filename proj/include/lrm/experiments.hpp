#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrm/calibration.hpp"
#include "lrm/datagen.hpp"
#include "lrm/solver.hpp"

namespace lrm {

/// Seeded Monte Carlo study. Per-trial seeds derive from
/// (master_seed, N-index, trial-index), so results are independent of the
/// parallelism degree.
struct StudyConfig {
    Scenario scenario = Scenario::Usr;
    int m = 10;
    int t = 10;
    int r = 1;
    std::vector<long> n_grid;
    int trials = 1;
    bool p_auto_rule = false; // p = 1/log(N/M) per grid point
    double p = 1.0;
    LambdaSpec lambda;
    NoiseModel noise = NoiseModel::gaussian(1.0);
    double spectral_scale = 1.0;
    std::uint64_t master_seed = 0;
    int jobs = 1;
    // solver knobs
    int max_iters = 5000;
    double rel_tol = 1e-9;
    StepMode step = StepMode::Fixed;
    int restarts = 5;
    CalibrationParams calib; // defaults for bound checks (D, H, ...)
};

struct StudyRow {
    long n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double p = 1.0;
    double lambda = 0.0;
    double pred_sq = 0.0;
    double frob_sq = 0.0;
    double schatten1 = 0.0;
    int rank_hat = 0;
    std::string bound_id;
    double bound_lhs = 0.0;
    double bound_rhs = 0.0;
    int holds = -1; // -1: not applicable
    int iters = 0;
    bool converged = false;
    bool valid = true; // false when the solver diverged
};

struct StudySummary {
    std::vector<long> n_values;
    std::vector<double> median_pred_sq;
    std::vector<double> holds_rate; // NaN when not applicable
    double slope = 0.0;
    double slope_stderr = 0.0;
};

struct StudyResult {
    StudyConfig config;
    std::vector<StudyRow> rows;
    StudySummary summary;

    std::string to_csv() const;
    std::string summary_csv() const;
};

/// Generate-fit-measure over the N grid; summary slope is the least-squares
/// fit of log median prediction error against log N.
StudyResult rate_study(const StudyConfig& config);

/// rate_study plus a per-trial bound check; only bounds with fully explicit
/// constants are accepted (thm1, usr_s1, cs_s1).
StudyResult coverage_study(const StudyConfig& config, const std::string& bound_id);

/// Noise-matrix concentration: per trial, compare |N^-1 sum xi_i X_i| with
/// the selected effective noise level. No estimator involved.
StudyResult noise_study(const StudyConfig& config, BoundTag bound);

} // namespace lrm
