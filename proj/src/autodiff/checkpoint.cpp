#include "ptmaml/autodiff/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace ptmaml::ad {

using nlohmann::json;

json params_to_json(const ParamSet& params) {
  json list = json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params[i];
    list.push_back({{"name", params.name(i)},
                    {"shape", t.shape()},
                    {"values", std::vector<double>(t.values().begin(), t.values().end())}});
  }
  return {{"format", "ptmaml-params"}, {"version", kCheckpointVersion}, {"params", std::move(list)}};
}

ParamSet params_from_json(const json& doc) {
  if (!doc.contains("version")) throw std::runtime_error("checkpoint has no version field");
  int version = doc.at("version").get<int>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  ParamSet params;
  for (const auto& entry : doc.at("params")) {
    params.add(entry.at("name").get<std::string>(),
               Tensor(entry.at("shape").get<Shape>(), entry.at("values").get<std::vector<double>>()));
  }
  return params;
}

void save_params(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << params_to_json(params).dump() << '\n';
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return params_from_json(json::parse(in));
}

} // namespace ptmaml::ad
