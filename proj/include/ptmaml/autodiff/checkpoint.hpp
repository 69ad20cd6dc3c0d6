#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ptmaml/autodiff/tensor.hpp"

namespace ptmaml::ad {

inline constexpr int kCheckpointVersion = 1;

/// {"format": "ptmaml-params", "version": 1,
///  "params": [{"name": str, "shape": [int], "values": [double]}]}
/// Doubles are written with round-trip precision, so load(save(p)) == p.
nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& doc);

void save_params(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_params(const std::filesystem::path& path);

} // namespace ptmaml::ad
