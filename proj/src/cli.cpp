#include "lrm/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lrm/experiments.hpp"
#include "lrm/lowerbound.hpp"
#include "lrm/metrics.hpp"
#include "lrm/rng.hpp"
#include "lrm/serialize.hpp"

namespace lrm::cli {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// precedence: explicit flag > LRM_SEED env > default 0
std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("LRM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("LRM_SEED", "not an unsigned integer");
        }
    }
    return flag_value;
}

struct CalibFlags {
    double sigma = CalibrationParams::nan();
    double d_conf = CalibrationParams::nan();
    double h = CalibrationParams::nan();
    double b_conf = CalibrationParams::nan();
    double a_conf = CalibrationParams::nan();
    double theta = CalibrationParams::nan();
    double c_star = CalibrationParams::nan();
    double phi = CalibrationParams::nan();
    double s_row = CalibrationParams::nan(), h_row = CalibrationParams::nan();
    double s_col = CalibrationParams::nan(), h_col = CalibrationParams::nan();
    double gram_cross = CalibrationParams::nan();
    double p = CalibrationParams::nan();

    void add_to(CLI::App* app) {
        app->add_option("--sigma", sigma, "noise scale sigma");
        app->add_option("--D", d_conf, "confidence parameter D (>= 2)");
        app->add_option("--H", h, "Bernstein H");
        app->add_option("--B", b_conf, "light-tail B");
        app->add_option("--A", a_conf, "matrix-Bernstein parameter A (> 1)");
        app->add_option("--theta", theta, "vartheta for tau7");
        app->add_option("--Cstar", c_star, "spectral growth exponent C*");
        app->add_option("--phi", phi, "phi_max(1), measured when omitted");
        app->add_option("--S-row", s_row, "row design constant S_row");
        app->add_option("--H-row", h_row, "row design constant H_row");
        app->add_option("--S-col", s_col, "column design constant S_col");
        app->add_option("--H-col", h_col, "column design constant H_col");
        app->add_option("--gram-cross", gram_cross,
                        "max(|sum X'X|, |sum XX'|)^(1/2) for tau6");
    }

    CalibrationParams to_params() const {
        CalibrationParams c;
        c.sigma = sigma;
        c.d_conf = d_conf;
        c.h = h;
        c.b_conf = b_conf;
        c.a_conf = a_conf;
        c.theta_conf = theta;
        c.c_star = c_star;
        c.phi_max1 = phi;
        c.s_row = s_row;
        c.h_row = h_row;
        c.s_col = s_col;
        c.h_col = h_col;
        c.gram_max_cross = gram_cross;
        c.p = p;
        return c;
    }
};

LambdaSpec parse_lambda(const std::string& text, const CalibrationParams& params) {
    if (text.rfind("auto:", 0) == 0)
        return LambdaSpec::auto_bound(bound_from_name(text.substr(5)), params);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--lambda", "expected a number or auto:<bound>");
    }
    if (used != text.size() || !(value >= 0.0))
        throw CLI::ValidationError("--lambda", "expected a nonnegative number or auto:<bound>");
    return LambdaSpec::explicit_value(value);
}

double parse_p(const std::string& text) {
    std::size_t used = 0;
    double p = 0.0;
    try {
        p = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--p", "expected 'auto' or a number in (0,1]");
    }
    if (used != text.size() || !(p > 0.0) || p > 1.0)
        throw CLI::ValidationError("--p", "expected 'auto' or a number in (0,1]");
    return p;
}

NoiseModel parse_noise(const std::string& kind, double sigma, double h) {
    if (kind == "none") return NoiseModel::none();
    if (kind == "gaussian") return NoiseModel::gaussian(sigma);
    if (kind == "bernstein")
        return NoiseModel::bounded_bernstein(sigma, std::isnan(h) ? sigma : h);
    throw CLI::ValidationError("--noise", "expected gaussian, bernstein or none");
}

struct StudyFlags {
    std::string scenario = "usr";
    int m = 20, t = 20, r = 2;
    std::vector<long> n_grid;
    int trials = 10;
    std::string p_text = "1";
    std::string lambda_text = "auto:tau1";
    double sigma = 1.0;
    std::string noise_kind = "gaussian";
    double h_noise = CalibrationParams::nan();
    double scale = 1.0;
    std::uint64_t seed = 0;
    int jobs = 1;
    int max_iters = 5000;
    double rel_tol = 1e-9;
    std::string step = "fixed";
    int restarts = 5;
    std::string out_path;
    std::string summary_path;
    CalibFlags calib;
    CLI::Option* seed_opt = nullptr;

    void add_to(CLI::App* app) {
        app->add_option("--scenario", scenario, "usr | cs | multitask | gaussian_dense")
            ->check(CLI::IsMember({"usr", "cs", "multitask", "gaussian_dense"}));
        app->add_option("--m", m, "rows")->check(CLI::PositiveNumber);
        app->add_option("--T", t, "columns")->check(CLI::PositiveNumber);
        app->add_option("--r", r, "target rank")->check(CLI::NonNegativeNumber);
        app->add_option("--N", n_grid, "sample sizes (comma separated)")
            ->required()
            ->delimiter(',');
        app->add_option("--trials", trials, "Monte Carlo trials per N")
            ->check(CLI::PositiveNumber);
        app->add_option("--p", p_text, "Schatten exponent in (0,1] or 'auto'");
        app->add_option("--lambda", lambda_text, "penalty: number or auto:<bound>");
        app->add_option("--noise", noise_kind, "gaussian | bernstein | none")
            ->check(CLI::IsMember({"gaussian", "bernstein", "none"}));
        app->add_option("--noise-H", h_noise, "Bernstein H of the noise");
        app->add_option("--scale", scale, "target top singular value of A*");
        seed_opt = app->add_option("--seed", seed, "master seed");
        app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        app->add_option("--max-iters", max_iters, "solver iteration cap");
        app->add_option("--rel-tol", rel_tol, "solver relative objective tolerance");
        app->add_option("--step", step, "fixed | backtracking")
            ->check(CLI::IsMember({"fixed", "backtracking"}));
        app->add_option("--restarts", restarts, "solver restarts (p < 1)");
        app->add_option("-o,--out", out_path, "rows CSV path")->required();
        app->add_option("--summary", summary_path, "summary CSV path");
        calib.add_to(app);
    }

    StudyConfig to_config() const {
        StudyConfig config;
        config.scenario = scenario_from_name(scenario);
        config.m = m;
        config.t = t;
        config.r = r;
        config.n_grid = n_grid;
        if (config.scenario == Scenario::Multitask)
            for (long n : n_grid)
                if (n % t != 0)
                    throw CLI::ValidationError("--N",
                                               "multitask N must be a multiple of T");
        config.trials = trials;
        if (p_text == "auto") {
            config.p_auto_rule = true;
        } else {
            config.p = parse_p(p_text);
        }
        CalibrationParams params = calib.to_params();
        if (std::isnan(params.sigma)) params.sigma = sigma;
        config.lambda = parse_lambda(lambda_text, params);
        config.noise = parse_noise(noise_kind, sigma, h_noise);
        config.spectral_scale = scale;
        config.master_seed = resolve_seed(seed_opt, seed);
        config.jobs = jobs;
        config.max_iters = max_iters;
        config.rel_tol = rel_tol;
        if (step == "fixed")
            config.step = StepMode::Fixed;
        else if (step == "backtracking")
            config.step = StepMode::Backtracking;
        else
            throw CLI::ValidationError("--step", "expected fixed or backtracking");
        config.restarts = restarts;
        config.calib = params;
        return config;
    }
};

void write_study(const StudyResult& result, const std::string& out_path,
                 const std::string& summary_path) {
    write_text_file(out_path, result.to_csv());
    if (!summary_path.empty()) write_text_file(summary_path, result.summary_csv());
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Schatten-p penalized least squares for trace regression"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    struct {
        std::string scenario = "usr";
        int m = 10, t = 10, r = 1;
        long n = 0;
        double sigma = 1.0;
        std::string noise_kind = "gaussian";
        double h_noise = CalibrationParams::nan();
        double scale = 1.0;
        std::uint64_t seed = 0;
        std::string out;
        CLI::Option* seed_opt = nullptr;
    } g;
    gen->add_option("--scenario", g.scenario, "usr | cs | multitask | gaussian_dense")
        ->check(CLI::IsMember({"usr", "cs", "multitask", "gaussian_dense"}));
    gen->add_option("--m", g.m)->check(CLI::PositiveNumber);
    gen->add_option("--T", g.t)->check(CLI::PositiveNumber);
    gen->add_option("--r", g.r)->check(CLI::NonNegativeNumber);
    gen->add_option("--N", g.n, "total observations")->required();
    gen->add_option("--sigma", g.sigma, "noise scale");
    gen->add_option("--noise", g.noise_kind, "gaussian | bernstein | none")
        ->check(CLI::IsMember({"gaussian", "bernstein", "none"}));
    gen->add_option("--noise-H", g.h_noise, "Bernstein H");
    gen->add_option("--scale", g.scale, "target top singular value of A*");
    g.seed_opt = gen->add_option("--seed", g.seed);
    gen->add_option("-o,--out", g.out)->required();

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "run the Schatten-p estimator");
    struct {
        std::string data_path;
        std::string p_text = "1";
        std::string lambda_text = "auto:tau1";
        int max_iters = 5000;
        double rel_tol = 1e-9;
        std::string step = "fixed";
        int restarts = 5;
        std::uint64_t seed = 0;
        std::string out;
        CalibFlags calib;
        CLI::Option* seed_opt = nullptr;
    } f;
    fit_cmd->add_option("--data", f.data_path, "dataset JSON")->required();
    fit_cmd->add_option("--p", f.p_text, "exponent in (0,1] or 'auto'");
    fit_cmd->add_option("--lambda", f.lambda_text, "number or auto:<bound>");
    fit_cmd->add_option("--max-iters", f.max_iters);
    fit_cmd->add_option("--rel-tol", f.rel_tol);
    fit_cmd->add_option("--step", f.step, "fixed | backtracking")
        ->check(CLI::IsMember({"fixed", "backtracking"}));
    fit_cmd->add_option("--restarts", f.restarts);
    f.seed_opt = fit_cmd->add_option("--seed", f.seed);
    fit_cmd->add_option("-o,--out", f.out)->required();
    f.calib.add_to(fit_cmd);

    // ---- rates / coverage / noise ----
    auto* rates = app.add_subcommand("rates", "prediction-error rate study");
    StudyFlags rates_flags;
    rates_flags.add_to(rates);

    auto* coverage = app.add_subcommand("coverage", "bound coverage study");
    StudyFlags coverage_flags;
    std::string coverage_bound = "usr_s1";
    coverage_flags.add_to(coverage);
    coverage->add_option("--bound", coverage_bound, "thm1 | usr_s1 | cs_s1")->required();

    auto* noise_cmd = app.add_subcommand("noise", "noise-matrix concentration study");
    StudyFlags noise_flags;
    std::string noise_bound = "tau4";
    noise_flags.add_to(noise_cmd);
    noise_cmd->add_option("--bound", noise_bound, "tau1|tau2|tau4|tau5|tau6|tau_row|tau_col")
        ->required();

    // ---- pack ----
    auto* pack = app.add_subcommand("pack", "Varshamov-Gilbert packing");
    struct {
        int n_bits = 16;
        int min_dist = 0;
        std::size_t target = 0;
        std::uint64_t seed = 0;
        std::string out;
        CLI::Option* seed_opt = nullptr;
    } pk;
    pack->add_option("--n-bits", pk.n_bits)->required()->check(CLI::PositiveNumber);
    pack->add_option("--min-dist", pk.min_dist, "default ceil(n/8)");
    pack->add_option("--target", pk.target, "default 2^ceil(n/8)");
    pk.seed_opt = pack->add_option("--seed", pk.seed);
    pack->add_option("-o,--out", pk.out)->required();

    // ---- calibrate ----
    auto* calibrate = app.add_subcommand("calibrate", "print an effective noise level");
    struct {
        std::string bound = "tau1";
        int m = 0, t = 0;
        long n = 0;
        std::string lambda_mode = "tau";
        CalibFlags calib;
    } cb;
    calibrate->add_option("--bound", cb.bound)->required();
    calibrate->add_option("--m", cb.m)->required();
    calibrate->add_option("--T", cb.t)->required();
    calibrate->add_option("--N", cb.n)->required();
    calibrate->add_option("--print", cb.lambda_mode, "tau (default) or lambda");
    calibrate->add_option("--p", cb.calib.p, "Schatten exponent (tau7)");
    cb.calib.add_to(calibrate);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (gen->parsed()) {
        const Scenario scenario = scenario_from_name(g.scenario);
        const NoiseModel noise = parse_noise(g.noise_kind, g.sigma, g.h_noise);
        const std::uint64_t seed = resolve_seed(g.seed_opt, g.seed);
        int n_per_task = 0;
        long mask_count = g.n;
        if (scenario == Scenario::Multitask) {
            if (g.n % g.t != 0)
                throw CLI::ValidationError("--N", "multitask N must be a multiple of T");
            n_per_task = static_cast<int>(g.n / g.t);
            mask_count = n_per_task;
        }
        const GroundTruth truth =
            gen_ground_truth(g.m, g.t, g.r, g.scale, derive_seed(seed, 0xA5u));
        SamplingOperator op = gen_masks(scenario, g.m, g.t, static_cast<int>(mask_count),
                                        derive_seed(seed, 0xB6u));
        const Dataset data = gen_dataset(truth, std::move(op), noise,
                                         derive_seed(seed, 0xC7u), scenario, n_per_task);
        save_dataset(g.out, data);
        return 0;
    }

    if (fit_cmd->parsed()) {
        CalibrationParams params = f.calib.to_params();
        const LambdaSpec lambda = parse_lambda(f.lambda_text, params);
        EstimatorConfig config;
        config.lambda = lambda;
        config.max_iters = f.max_iters;
        config.rel_tol = f.rel_tol;
        config.restarts = f.restarts;
        config.seed = resolve_seed(f.seed_opt, f.seed);
        if (f.step == "fixed")
            config.step = StepMode::Fixed;
        else if (f.step == "backtracking")
            config.step = StepMode::Backtracking;
        else
            throw CLI::ValidationError("--step", "expected fixed or backtracking");

        if (f.p_text != "auto") parse_p(f.p_text); // validate before any file work
        const Dataset data = load_dataset(f.data_path);
        config.p = f.p_text == "auto" ? p_auto(data.n(), data.m(), data.t())
                                      : parse_p(f.p_text);
        const FitResult result = fit(data, config);
        write_text_file(f.out, fit_result_to_json(result).dump(2) + "\n");
        return 0;
    }

    if (rates->parsed()) {
        write_study(rate_study(rates_flags.to_config()), rates_flags.out_path,
                    rates_flags.summary_path);
        return 0;
    }
    if (coverage->parsed()) {
        write_study(coverage_study(coverage_flags.to_config(), coverage_bound),
                    coverage_flags.out_path, coverage_flags.summary_path);
        return 0;
    }
    if (noise_cmd->parsed()) {
        write_study(noise_study(noise_flags.to_config(), bound_from_name(noise_bound)),
                    noise_flags.out_path, noise_flags.summary_path);
        return 0;
    }

    if (pack->parsed()) {
        const int min_dist = pk.min_dist > 0 ? pk.min_dist : (pk.n_bits + 7) / 8;
        const std::size_t target =
            pk.target > 0 ? pk.target
                          : (static_cast<std::size_t>(1) << std::min((pk.n_bits + 7) / 8, 62));
        const std::uint64_t seed = resolve_seed(pk.seed_opt, pk.seed);
        const std::vector<Codeword> words = vg_packing(pk.n_bits, min_dist, target, seed);
        nlohmann::json j;
        j["n_bits"] = pk.n_bits;
        j["min_dist"] = min_dist;
        nlohmann::json list = nlohmann::json::array();
        for (const Codeword& w : words) {
            nlohmann::json bits = nlohmann::json::array();
            for (std::uint8_t b : w) bits.push_back(static_cast<int>(b));
            list.push_back(std::move(bits));
        }
        j["codewords"] = std::move(list);
        write_text_file(pk.out, j.dump(2) + "\n");
        return 0;
    }

    if (calibrate->parsed()) {
        CalibrationParams params = cb.calib.to_params();
        params.m = cb.m;
        params.t = cb.t;
        params.n_obs = cb.n;
        const BoundTag tag = bound_from_name(cb.bound);
        const double value = cb.lambda_mode == "lambda" ? lambda_auto(tag, params)
                                                        : effective_noise(tag, params);
        std::cout << fmt17(value) << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    try {
        try {
            return dispatch(args);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return 0; // --help
            std::cerr << "ERROR 2: " << e.what() << "\n";
            return 2;
        } catch (const CLI::Error& e) {
            std::cerr << "ERROR 2: " << e.what() << "\n";
            return 2;
        } catch (const ConfigurationError& e) {
            std::cerr << "ERROR 2: " << e.what() << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "ERROR 1: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace lrm::cli
