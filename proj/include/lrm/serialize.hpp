#pragma once

#include <string>

#include "lrm/datagen.hpp"
#include "lrm/lowerbound.hpp"
#include "lrm/solver.hpp"

#include <json.hpp>

namespace lrm {

// JSON payloads are plain decimals; doubles survive a round trip exactly.

nlohmann::json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json mask_to_json(const Mask& mask);
Mask mask_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

nlohmann::json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json packing_to_json(const PackingDesign& design);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);

} // namespace lrm
