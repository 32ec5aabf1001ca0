#include "lrm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "lrm/metrics.hpp"
#include "lrm/rng.hpp"

namespace lrm {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_config(const StudyConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("study: trials >= 1");
    if (config.n_grid.empty()) throw std::invalid_argument("study: empty N grid");
    for (std::size_t i = 1; i < config.n_grid.size(); ++i)
        if (config.n_grid[i] <= config.n_grid[i - 1])
            throw std::invalid_argument("study: N grid must be strictly increasing");
    if (config.jobs < 1) throw std::invalid_argument("study: jobs >= 1");
}

Dataset make_dataset(const StudyConfig& config, long n, std::uint64_t trial_seed) {
    int n_per_task = 0;
    long mask_count = n;
    if (config.scenario == Scenario::Multitask) {
        if (n % config.t != 0)
            throw std::invalid_argument("study: multitask N must be a multiple of T");
        n_per_task = static_cast<int>(n / config.t);
        mask_count = n_per_task;
    }
    const GroundTruth truth =
        gen_ground_truth(config.m, config.t, config.r, config.spectral_scale,
                         derive_seed(trial_seed, 0xA5u));
    SamplingOperator op = gen_masks(config.scenario, config.m, config.t,
                                    static_cast<int>(mask_count),
                                    derive_seed(trial_seed, 0xB6u));
    return gen_dataset(truth, std::move(op), config.noise, derive_seed(trial_seed, 0xC7u),
                       config.scenario, n_per_task);
}

// runs fn(n_idx, trial) over the whole grid on `jobs` threads; output slots
// are preassigned so the schedule cannot influence the result
template <typename Fn>
void parallel_trials(const StudyConfig& config, Fn&& fn) {
    const long total = static_cast<long>(config.n_grid.size()) * config.trials;
    std::atomic<long> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_lock;

    auto worker = [&] {
        for (;;) {
            const long k = cursor.fetch_add(1);
            if (k >= total) return;
            try {
                fn(static_cast<int>(k / config.trials),
                   static_cast<int>(k % config.trials));
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_lock);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int jobs = std::min<long>(config.jobs, total);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size() / 2;
    return values.size() % 2 == 1 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

void summarize(StudyResult& result) {
    const StudyConfig& config = result.config;
    StudySummary& summary = result.summary;
    summary.n_values = config.n_grid;

    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
        std::vector<double> preds;
        long holds_n = 0, holds_yes = 0;
        for (const StudyRow& row : result.rows) {
            if (row.n != config.n_grid[ni] || !row.valid) continue;
            if (std::isfinite(row.pred_sq)) preds.push_back(row.pred_sq);
            if (row.holds >= 0) {
                ++holds_n;
                holds_yes += row.holds == 1;
            }
        }
        summary.median_pred_sq.push_back(median_of(std::move(preds)));
        summary.holds_rate.push_back(
            holds_n > 0 ? static_cast<double>(holds_yes) / holds_n
                        : std::numeric_limits<double>::quiet_NaN());
    }

    // least-squares slope of log median_pred_sq vs log N
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < summary.n_values.size(); ++i) {
        if (std::isfinite(summary.median_pred_sq[i]) && summary.median_pred_sq[i] > 0.0) {
            xs.push_back(std::log(static_cast<double>(summary.n_values[i])));
            ys.push_back(std::log(summary.median_pred_sq[i]));
        }
    }
    if (xs.size() >= 2) {
        const double n = static_cast<double>(xs.size());
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
        }
        const double mx = sx / n, my = sy / n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        summary.slope = sxy / sxx;
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double resid = ys[i] - my - summary.slope * (xs[i] - mx);
            rss += resid * resid;
        }
        summary.slope_stderr =
            xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    }
}

StudyResult run_fit_study(const StudyConfig& config, const std::string& bound_id) {
    check_config(config);
    StudyResult result;
    result.config = config;
    result.rows.resize(config.n_grid.size() * config.trials);

    parallel_trials(config, [&](int n_idx, int trial) {
        const long n = config.n_grid[n_idx];
        const std::uint64_t trial_seed = derive_seed(
            config.master_seed, static_cast<std::uint64_t>(n_idx),
            static_cast<std::uint64_t>(trial));
        StudyRow& row = result.rows[static_cast<std::size_t>(n_idx) * config.trials + trial];
        row.n = n;
        row.trial = trial;
        row.seed = trial_seed;
        row.bound_id = bound_id;

        const Dataset data = make_dataset(config, n, trial_seed);

        EstimatorConfig est;
        est.p = config.p_auto_rule ? p_auto(data.n(), config.m, config.t) : config.p;
        est.lambda = config.lambda;
        est.max_iters = config.max_iters;
        est.rel_tol = config.rel_tol;
        est.step = config.step;
        est.restarts = config.restarts;
        est.seed = trial_seed;
        est.warm_start_truth = est.p < 1.0;
        row.p = est.p;

        FitResult fit_result;
        try {
            fit_result = fit(data, est);
        } catch (const DivergenceError&) {
            row.valid = false;
            row.pred_sq = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        row.lambda = fit_result.lambda_used;
        row.iters = fit_result.iterations;
        row.converged = fit_result.converged;

        // basic inequality is a hard assertion on every fit with known truth
        const double gap =
            basic_inequality_gap(data, fit_result.a_hat, est.p, fit_result.lambda_used);
        if (gap > 1e-8)
            throw std::runtime_error("basic inequality violated (gap " +
                                     std::to_string(gap) + ")");

        const ErrorReport report =
            error_report(data.op, fit_result.a_hat, data.truth->a_star, {1.0});
        row.pred_sq = report.pred_sq;
        row.frob_sq = report.frob_per_entry * data.m() * data.t();
        row.schatten1 = schatten(fit_result.a_hat - data.truth->a_star, 1.0);
        row.rank_hat = report.rank_hat;

        if (!bound_id.empty()) {
            const BoundCheck check =
                bound_check(bound_id, data, fit_result, config.calib, est.p);
            row.bound_lhs = check.lhs;
            row.bound_rhs = check.rhs;
            row.holds = check.holds.has_value() ? (*check.holds ? 1 : 0) : -1;
        }
    });

    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const StudyRow& a, const StudyRow& b) {
                         return a.n != b.n ? a.n < b.n : a.trial < b.trial;
                     });
    summarize(result);
    return result;
}

} // namespace

StudyResult rate_study(const StudyConfig& config) { return run_fit_study(config, ""); }

StudyResult coverage_study(const StudyConfig& config, const std::string& bound_id) {
    if (bound_id != "thm1" && bound_id != "usr_s1" && bound_id != "cs_s1")
        throw ConfigurationError(
            "coverage_study: bound must have explicit constants (thm1, usr_s1, cs_s1)");
    return run_fit_study(config, bound_id);
}

StudyResult noise_study(const StudyConfig& config, BoundTag bound) {
    switch (bound) {
        case BoundTag::Tau1:
        case BoundTag::Tau2:
        case BoundTag::Tau4:
        case BoundTag::Tau5:
        case BoundTag::Tau6:
        case BoundTag::TauRow:
        case BoundTag::TauCol: break;
        default:
            throw ConfigurationError("noise_study: unsupported bound " + bound_name(bound));
    }
    check_config(config);

    StudyResult result;
    result.config = config;
    result.rows.resize(config.n_grid.size() * config.trials);

    parallel_trials(config, [&](int n_idx, int trial) {
        const long n = config.n_grid[n_idx];
        const std::uint64_t trial_seed = derive_seed(
            config.master_seed, static_cast<std::uint64_t>(n_idx),
            static_cast<std::uint64_t>(trial));
        StudyRow& row = result.rows[static_cast<std::size_t>(n_idx) * config.trials + trial];
        row.n = n;
        row.trial = trial;
        row.seed = trial_seed;
        row.bound_id = bound_name(bound);
        row.p = config.p;
        row.pred_sq = std::numeric_limits<double>::quiet_NaN();
        row.frob_sq = std::numeric_limits<double>::quiet_NaN();
        row.schatten1 = std::numeric_limits<double>::quiet_NaN();

        long mask_count = n;
        if (config.scenario == Scenario::Multitask) {
            if (n % config.t != 0)
                throw std::invalid_argument("study: multitask N must be a multiple of T");
            mask_count = n / config.t;
        }
        SamplingOperator op = gen_masks(config.scenario, config.m, config.t,
                                        static_cast<int>(mask_count),
                                        derive_seed(trial_seed, 0xB6u));
        const std::vector<double> xi =
            draw_noise(config.noise, op.n(), derive_seed(trial_seed, 0xC7u));

        CalibrationParams params = config.calib;
        params.m = config.m;
        params.t = config.t;
        params.n_obs = op.n();
        if (std::isnan(params.sigma)) params.sigma = config.noise.sigma;
        if (std::isnan(params.h) && config.noise.kind == NoiseKind::BoundedBernstein)
            params.h = config.noise.h;
        if (bound == BoundTag::Tau1 && std::isnan(params.phi_max1))
            params.phi_max1 = phi_max1(op);
        if (bound == BoundTag::Tau6 && std::isnan(params.gram_max_cross)) {
            // exact spectral norms of sum X'X and sum XX'
            Matrix gram_t(config.t, config.t), gram_m(config.m, config.m);
            for (const Mask& mask : op.masks()) {
                Matrix dense(config.m, config.t);
                mask_accumulate(mask, 1.0, dense);
                gram_t += matmul(dense.transposed(), dense);
                gram_m += matmul(dense, dense.transposed());
            }
            const double inf = std::numeric_limits<double>::infinity();
            params.gram_max_cross =
                std::sqrt(std::max(schatten(gram_t, inf), schatten(gram_m, inf)));
        }
        if ((bound == BoundTag::TauRow || bound == BoundTag::TauCol)) {
            // measure the design constants when not supplied
            Matrix dense(config.m, config.t);
            std::vector<double> row_sq(config.m, 0.0), col_sq(config.t, 0.0);
            double h_row = 0.0, h_col = 0.0;
            for (const Mask& mask : op.masks()) {
                for (double& v : dense.entries()) v = 0.0;
                mask_accumulate(mask, 1.0, dense);
                for (int i = 0; i < config.m; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < config.t; ++j) s += dense(i, j) * dense(i, j);
                    row_sq[i] += s;
                    h_row = std::max(h_row, std::sqrt(s));
                }
                for (int j = 0; j < config.t; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < config.m; ++i) s += dense(i, j) * dense(i, j);
                    col_sq[j] += s;
                    h_col = std::max(h_col, std::sqrt(s));
                }
            }
            const double inv_n = 1.0 / static_cast<double>(op.n());
            if (std::isnan(params.s_row))
                params.s_row =
                    std::sqrt(*std::max_element(row_sq.begin(), row_sq.end()) * inv_n);
            if (std::isnan(params.h_row)) params.h_row = h_row;
            if (std::isnan(params.s_col))
                params.s_col =
                    std::sqrt(*std::max_element(col_sq.begin(), col_sq.end()) * inv_n);
            if (std::isnan(params.h_col)) params.h_col = h_col;
        }

        row.bound_lhs = noise_matrix_norm(op, xi);
        row.bound_rhs = effective_noise(bound, params);
        row.holds = row.bound_lhs <= row.bound_rhs ? 1 : 0;
        row.lambda = 4.0 * row.bound_rhs;
    });

    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const StudyRow& a, const StudyRow& b) {
                         return a.n != b.n ? a.n < b.n : a.trial < b.trial;
                     });
    summarize(result);
    return result;
}

std::string StudyResult::to_csv() const {
    std::string out =
        "scenario,m,T,r,N,trial,seed,p,lambda,pred_sq,frob_sq,schatten1,rank_hat,"
        "bound_id,bound_lhs,bound_rhs,holds,iters,converged\n";
    for (const StudyRow& row : rows) {
        out += scenario_name(config.scenario);
        out += ',' + std::to_string(config.m);
        out += ',' + std::to_string(config.t);
        out += ',' + std::to_string(config.r);
        out += ',' + std::to_string(row.n);
        out += ',' + std::to_string(row.trial);
        out += ',' + std::to_string(row.seed);
        out += ',' + fmt(row.p);
        out += ',' + fmt(row.lambda);
        out += ',' + fmt(row.pred_sq);
        out += ',' + fmt(row.frob_sq);
        out += ',' + fmt(row.schatten1);
        out += ',' + std::to_string(row.rank_hat);
        out += ',' + row.bound_id;
        out += ',' + (row.bound_id.empty() ? std::string() : fmt(row.bound_lhs));
        out += ',' + (row.bound_id.empty() ? std::string() : fmt(row.bound_rhs));
        out += ',' + (row.holds < 0 ? std::string() : std::to_string(row.holds));
        out += ',' + std::to_string(row.iters);
        out += ',' + std::string(row.converged ? "1" : "0");
        out += '\n';
    }
    return out;
}

std::string StudyResult::summary_csv() const {
    std::string out = "N,median_pred_sq,holds_rate\n";
    for (std::size_t i = 0; i < summary.n_values.size(); ++i) {
        out += std::to_string(summary.n_values[i]);
        out += ',' + fmt(summary.median_pred_sq[i]);
        out += ',' +
               (std::isnan(summary.holds_rate[i]) ? std::string() : fmt(summary.holds_rate[i]));
        out += '\n';
    }
    out += "slope," + fmt(summary.slope) + "," + fmt(summary.slope_stderr) + "\n";
    return out;
}

} // namespace lrm
