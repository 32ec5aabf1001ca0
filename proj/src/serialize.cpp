#include "lrm/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrm {

using nlohmann::json;

json matrix_to_json(const Matrix& a) {
    json rows = json::array();
    for (int i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("matrix JSON: expected non-empty array of rows");
    std::vector<std::vector<double>> rows;
    rows.reserve(j.size());
    for (const auto& row : j) {
        if (!row.is_array()) throw std::invalid_argument("matrix JSON: row is not an array");
        rows.push_back(row.get<std::vector<double>>());
    }
    return Matrix::from_rows(rows);
}

json mask_to_json(const Mask& mask) {
    json j;
    if (const auto* p = std::get_if<PointMask>(&mask)) {
        j["type"] = "point";
        j["row"] = p->row;
        j["col"] = p->col;
    } else if (const auto* c = std::get_if<ColumnMask>(&mask)) {
        j["type"] = "column";
        j["task"] = c->task;
        j["x"] = c->x;
    } else {
        j["type"] = "dense";
        j["data"] = matrix_to_json(std::get<DenseMask>(mask).data);
    }
    return j;
}

Mask mask_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "point") return PointMask{j.at("row").get<int>(), j.at("col").get<int>()};
    if (type == "column")
        return ColumnMask{j.at("task").get<int>(), j.at("x").get<std::vector<double>>()};
    if (type == "dense") return DenseMask{matrix_from_json(j.at("data"))};
    throw std::invalid_argument("mask JSON: unknown type " + type);
}

json dataset_to_json(const Dataset& data) {
    json j;
    j["m"] = data.m();
    j["T"] = data.t();
    j["N"] = data.n();
    j["scenario"] = scenario_name(data.scenario);
    j["seed"] = data.seed;
    j["sigma"] = data.noise.sigma;
    switch (data.noise.kind) {
        case NoiseKind::Gaussian: j["noise"] = "gaussian"; break;
        case NoiseKind::BoundedBernstein:
            j["noise"] = "bernstein";
            j["H"] = data.noise.h;
            break;
        case NoiseKind::None: j["noise"] = "none"; break;
    }
    if (data.scenario == Scenario::Multitask) j["n_per_task"] = data.n_per_task;
    json masks = json::array();
    for (const Mask& mask : data.op.masks()) masks.push_back(mask_to_json(mask));
    j["masks"] = std::move(masks);
    j["y"] = data.y;
    if (data.truth.has_value()) {
        j["a_star"] = matrix_to_json(data.truth->a_star);
        j["r"] = data.truth->r;
    }
    return j;
}

Dataset dataset_from_json(const json& j) {
    const int m = j.at("m").get<int>();
    const int t = j.at("T").get<int>();
    std::vector<Mask> masks;
    for (const auto& mj : j.at("masks")) masks.push_back(mask_from_json(mj));
    SamplingOperator op(m, t, std::move(masks));

    std::vector<double> y = j.at("y").get<std::vector<double>>();
    if (static_cast<int>(y.size()) != op.n())
        throw std::invalid_argument("dataset JSON: |y| != number of masks");
    if (j.contains("N") && j.at("N").get<int>() != op.n())
        throw std::invalid_argument("dataset JSON: N field disagrees with masks");

    NoiseModel noise = NoiseModel::none();
    const std::string kind = j.value("noise", "gaussian");
    const double sigma = j.value("sigma", 0.0);
    if (kind == "gaussian" && sigma > 0.0) noise = NoiseModel::gaussian(sigma);
    else if (kind == "bernstein")
        noise = NoiseModel::bounded_bernstein(sigma, j.value("H", sigma));

    std::optional<GroundTruth> truth;
    if (j.contains("a_star")) {
        GroundTruth g;
        g.a_star = matrix_from_json(j.at("a_star"));
        if (g.a_star.rows() != m || g.a_star.cols() != t)
            throw std::invalid_argument("dataset JSON: a_star dims mismatch");
        g.r = j.value("r", numerical_rank(g.a_star));
        g.spectral_scale = schatten(g.a_star, std::numeric_limits<double>::infinity());
        truth = std::move(g);
    }

    Dataset data{std::move(op),
                 std::move(y),
                 std::move(truth),
                 noise,
                 j.value("seed", std::uint64_t{0}),
                 scenario_from_name(j.value("scenario", "usr")),
                 j.value("n_per_task", 0)};
    return data;
}

json fit_result_to_json(const FitResult& fit) {
    json j;
    j["a_hat"] = matrix_to_json(fit.a_hat);
    j["objective"] = fit.objective;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["lambda_used"] = fit.lambda_used;
    return j;
}

FitResult fit_result_from_json(const json& j) {
    FitResult fit;
    fit.a_hat = matrix_from_json(j.at("a_hat"));
    fit.objective = j.at("objective").get<double>();
    fit.iterations = j.at("iterations").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.lambda_used = j.at("lambda_used").get<double>();
    return fit;
}

json packing_to_json(const PackingDesign& design) {
    json j;
    j["n_bits"] = design.n_bits;
    j["min_dist"] = design.min_dist;
    json words = json::array();
    for (const Codeword& w : design.codewords) {
        json bits = json::array();
        for (std::uint8_t b : w) bits.push_back(static_cast<int>(b));
        words.push_back(std::move(bits));
    }
    j["codewords"] = std::move(words);
    j["s"] = design.s;
    j["gamma"] = design.gamma;
    j["nu"] = design.nu;
    return j;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Dataset load_dataset(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("dataset JSON parse error in " + path + ": " + e.what());
    }
    return dataset_from_json(j);
}

void save_dataset(const std::string& path, const Dataset& data) {
    write_text_file(path, dataset_to_json(data).dump(2) + "\n");
}

} // namespace lrm
