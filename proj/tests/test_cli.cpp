#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrm/cli.hpp"
#include "lrm/serialize.hpp"

using namespace lrm;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

int run_cli(std::initializer_list<std::string> args) {
    return cli::run(std::vector<std::string>(args));
}

} // namespace

TEST_CASE("gen writes a loadable dataset and fit consumes it") {
    const auto data_path = tmp_file("lrm_cli_data.json");
    const auto fit_path = tmp_file("lrm_cli_fit.json");

    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "12", "--T", "12", "--r", "2",
                   "--N", "200", "--sigma", "1.0", "--seed", "42", "-o",
                   data_path.string()}) == 0);

    const Dataset data = load_dataset(data_path.string());
    CHECK(data.m() == 12);
    CHECK(data.t() == 12);
    CHECK(data.n() == 200);
    REQUIRE(data.truth.has_value());
    CHECK(data.truth->r == 2);

    CHECK(run_cli({"fit", "--data", data_path.string(), "--p", "1", "--lambda",
                   "auto:tau2", "--D", "2", "--H", "1", "-o", fit_path.string()}) == 0);

    const FitResult fit =
        fit_result_from_json(nlohmann::json::parse(read_text_file(fit_path.string())));
    CalibrationParams params;
    params.sigma = 1.0;
    params.d_conf = 2.0;
    params.h = 1.0;
    params.m = 12;
    params.t = 12;
    params.n_obs = 200;
    CHECK(fit.lambda_used ==
          doctest::Approx(lambda_auto(BoundTag::Tau2, params)).epsilon(1e-12));

    std::remove(data_path.string().c_str());
    std::remove(fit_path.string().c_str());
}

TEST_CASE("p auto feeds the nonconvex calibration bound") {
    const auto data_path = tmp_file("lrm_cli_pauto.json");
    const auto fit_path = tmp_file("lrm_cli_pauto_fit.json");
    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "10", "--T", "10", "--r", "1",
                   "--N", "400", "--sigma", "0.5", "--seed", "8", "-o",
                   data_path.string()}) == 0);
    CHECK(run_cli({"fit", "--data", data_path.string(), "--p", "auto", "--lambda",
                   "auto:tau7", "--theta", "1", "-o", fit_path.string()}) == 0);

    const FitResult fit =
        fit_result_from_json(nlohmann::json::parse(read_text_file(fit_path.string())));
    CalibrationParams params;
    params.theta_conf = 1.0;
    params.p = p_auto(400, 10, 10);
    params.m = params.t = 10;
    params.n_obs = 400;
    CHECK(fit.lambda_used ==
          doctest::Approx(lambda_auto(BoundTag::Tau7, params)).epsilon(1e-12));

    // theta is required for tau7
    CHECK(run_cli({"fit", "--data", data_path.string(), "--p", "auto", "--lambda",
                   "auto:tau7", "-o", fit_path.string()}) == 2);
    std::remove(data_path.string().c_str());
    std::remove(fit_path.string().c_str());
}

TEST_CASE("gen -> file -> gen round trip is identical") {
    const auto p1 = tmp_file("lrm_cli_rt1.json");
    const auto p2 = tmp_file("lrm_cli_rt2.json");
    for (const auto& path : {p1, p2})
        CHECK(run_cli({"gen", "--scenario", "cs", "--m", "6", "--T", "5", "--r", "1",
                       "--N", "30", "--sigma", "0.5", "--seed", "7", "-o",
                       path.string()}) == 0);
    CHECK(read_text_file(p1.string()) == read_text_file(p2.string()));
    std::remove(p1.string().c_str());
    std::remove(p2.string().c_str());
}

TEST_CASE("calibrate prints the worked tau4 value") {
    std::ostringstream captured;
    std::streambuf* saved = std::cout.rdbuf(captured.rdbuf());
    const int code = run_cli({"calibrate", "--bound", "tau4", "--sigma", "1", "--D", "2",
                              "--m", "10", "--T", "10", "--N", "100"});
    std::cout.rdbuf(saved);
    CHECK(code == 0);
    CHECK(std::stod(captured.str()) == doctest::Approx(0.50596442562694069).epsilon(1e-12));

    // lambda mode quadruples tau
    std::ostringstream captured2;
    saved = std::cout.rdbuf(captured2.rdbuf());
    CHECK(run_cli({"calibrate", "--bound", "tau4", "--print", "lambda", "--sigma", "1",
                   "--D", "2", "--m", "10", "--T", "10", "--N", "100"}) == 0);
    std::cout.rdbuf(saved);
    CHECK(std::stod(captured2.str()) ==
          doctest::Approx(4.0 * 0.50596442562694069).epsilon(1e-12));
}

TEST_CASE("flag validation errors exit with code 2") {
    CHECK(run_cli({"unknown-command"}) == 2);
    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "4"}) == 2); // missing -o / --N
    CHECK(run_cli({"gen", "--scenario", "bogus", "--m", "4", "--T", "4", "--r", "1",
                   "--N", "4", "-o", tmp_file("x.json").string()}) == 2);
    CHECK(run_cli({"fit", "--data", "nope.json", "--p", "3", "-o", "out.json"}) == 2);
    CHECK(run_cli({"noise", "--bound", "tau7", "--N", "64", "-o",
                   tmp_file("n.csv").string()}) == 2);
}

TEST_CASE("runtime errors exit with code 1") {
    CHECK(run_cli({"fit", "--data", "/nonexistent/data.json", "-o",
                   tmp_file("f.json").string()}) == 1);

    // schema violation: masks/y length mismatch
    const auto bad_path = tmp_file("lrm_cli_bad.json");
    write_text_file(bad_path.string(),
                    R"({"m":2,"T":2,"N":1,"scenario":"usr","seed":0,"sigma":1.0,)"
                    R"("noise":"gaussian","masks":[{"type":"point","row":0,"col":0}],)"
                    R"("y":[1.0,2.0]})");
    CHECK(run_cli({"fit", "--data", bad_path.string(), "-o",
                   tmp_file("f.json").string()}) == 1);
    std::remove(bad_path.string().c_str());
}

TEST_CASE("LRM_SEED env var is overridden by an explicit --seed flag") {
    const auto env_path = tmp_file("lrm_cli_env.json");
    const auto flag_path = tmp_file("lrm_cli_flag.json");
    const auto plain_path = tmp_file("lrm_cli_plain.json");

    setenv("LRM_SEED", "123", 1);
    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "4", "--T", "4", "--r", "1", "--N",
                   "8", "-o", env_path.string()}) == 0);
    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "4", "--T", "4", "--r", "1", "--N",
                   "8", "--seed", "99", "-o", flag_path.string()}) == 0);
    unsetenv("LRM_SEED");
    CHECK(run_cli({"gen", "--scenario", "usr", "--m", "4", "--T", "4", "--r", "1", "--N",
                   "8", "--seed", "123", "-o", plain_path.string()}) == 0);

    CHECK(read_text_file(env_path.string()) == read_text_file(plain_path.string()));
    CHECK(read_text_file(env_path.string()) != read_text_file(flag_path.string()));
    for (const auto& path : {env_path, flag_path, plain_path})
        std::remove(path.string().c_str());
}

TEST_CASE("pack subcommand writes codewords") {
    const auto path = tmp_file("lrm_cli_pack.json");
    CHECK(run_cli({"pack", "--n-bits", "16", "--min-dist", "2", "--target", "4", "--seed",
                   "3", "-o", path.string()}) == 0);
    const auto j = nlohmann::json::parse(read_text_file(path.string()));
    CHECK(j.at("n_bits") == 16);
    CHECK(j.at("min_dist") == 2);
    CHECK(j.at("codewords").size() >= 4);
    std::remove(path.string().c_str());
}

TEST_CASE("rates subcommand writes CSV with summary") {
    const auto csv_path = tmp_file("lrm_cli_rates.csv");
    const auto sum_path = tmp_file("lrm_cli_rates_summary.csv");
    CHECK(run_cli({"rates", "--scenario", "usr", "--m", "6", "--T", "6", "--r", "1",
                   "--N", "40,80", "--trials", "2", "--lambda", "0.2", "--sigma", "0.5",
                   "--seed", "5", "-o", csv_path.string(), "--summary",
                   sum_path.string()}) == 0);
    const std::string csv = read_text_file(csv_path.string());
    CHECK(csv.find("scenario,m,T,r,N,trial,seed,p,lambda,pred_sq") == 0);
    CHECK(read_text_file(sum_path.string()).find("N,median_pred_sq,holds_rate") == 0);
    std::remove(csv_path.string().c_str());
    std::remove(sum_path.string().c_str());
}
