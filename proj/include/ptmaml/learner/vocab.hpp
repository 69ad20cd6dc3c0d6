#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ptmaml/data/dataset.hpp"

namespace ptmaml::learner {

/// Word vocabulary of the encoder. Header names enter as their collapsed
/// ('^'-joined) form, so a column is one input token.
class Vocab {
public:
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr std::string_view kSeparator = "<sep>";
  static constexpr std::string_view kTableSlot = "<table>";
  static constexpr std::string_view kGo = "<go>";
  static constexpr std::string_view kEnd = "<end>";

  Vocab();
  /// Specials, then question tokens and collapsed header names of `train`
  /// in first-seen order.
  static Vocab build(const data::Dataset& train);

  std::size_t add(std::string_view token);
  /// Id of `token`, or of <unk> when absent.
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }
  const std::string& token(std::size_t id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// "game site" -> "game^site".
std::string collapsed_header(std::string_view name);

} // namespace ptmaml::learner
