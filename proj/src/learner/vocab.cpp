#include "ptmaml/learner/vocab.hpp"

#include <fstream>

#include "ptmaml/sql/text.hpp"

namespace ptmaml::learner {

using nlohmann::json;

std::string collapsed_header(std::string_view name) { return sql::normalize_value(name); }

Vocab::Vocab() {
  for (auto s : {kUnknown, kSeparator, kTableSlot, kGo, kEnd}) add(s);
}

Vocab Vocab::build(const data::Dataset& train) {
  Vocab v;
  for (const auto& ex : train.examples) {
    for (const auto& h : ex.header) v.add(collapsed_header(h));
    for (const auto& t : ex.tokens) v.add(t);
  }
  return v;
}

std::size_t Vocab::add(std::string_view token) {
  auto [it, inserted] = index_.emplace(std::string(token), tokens_.size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

std::size_t Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? 0 : it->second;
}

json Vocab::to_json() const { return {{"format", "ptmaml-vocab"}, {"version", 1}, {"tokens", tokens_}}; }

Vocab Vocab::from_json(const json& j) {
  if (j.value("version", 0) != 1) throw std::runtime_error("unsupported vocabulary version");
  Vocab v;
  for (const auto& t : j.at("tokens")) v.add(t.get<std::string>());
  if (v.size() != j.at("tokens").size()) throw std::runtime_error("vocabulary has duplicate tokens");
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return from_json(json::parse(in));
}

} // namespace ptmaml::learner
