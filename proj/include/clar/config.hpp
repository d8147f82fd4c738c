#pragma once

#include <filesystem>

#include <json.hpp>

#include "clar/training.hpp"

namespace clar {

/// Flat JSON object, e.g.
///   {"reg":"clar","alpha":1.0,"beta":2.0,"S":2,"strategy":"node","clamp":1.0,
///    "lr":0.01,"epochs":200,"patience":50,"hidden":16,"depth":2,"seed":0,
///    "backbone":"gcn","split":"random"}
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// InvalidArgument.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::filesystem::path& path);
/// Full echo with every key, accepted back by train_config_from_json.
nlohmann::json to_json(const TrainConfig& cfg);

LaplacianKind parse_laplacian_kind(const std::string& name);
std::string to_string(LaplacianKind kind);
SampleKind parse_sample_kind(const std::string& name);
std::string to_string(SampleKind kind);

/// Writes `j` with 2-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace clar
