#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ptmaml/data/dataset.hpp"

namespace ptmaml::relevance {

struct ClassifierConfig {
  int epochs = 20;
  double learning_rate = 0.1;
  double reg = 1e-4;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVMs over bag-of-words counts of the question tokens.
class TypeClassifier {
public:
  using Scores = std::array<double, sql::kSqlTypeCount>;

  /// Hinge loss + L2, trained by subgradient descent over shuffled
  /// examples. Labels are the gold query types. A type absent from the
  /// training data is reported in missing_types() and never predicted.
  static TypeClassifier train(const data::Dataset& train, const ClassifierConfig& cfg);

  /// Argmax over present types; ties go to the lowest type index.
  /// Out-of-vocabulary tokens are ignored and duplicates count.
  sql::SqlType predict(const std::vector<std::string>& tokens) const;
  Scores scores(const std::vector<std::string>& tokens) const;

  std::vector<sql::SqlType> missing_types() const;
  std::size_t vocabulary_size() const { return vocab_.size(); }

  nlohmann::json to_json() const;
  static TypeClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TypeClassifier load(const std::filesystem::path& path);

private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::array<std::vector<double>, sql::kSqlTypeCount> weights_;
  Scores bias_{};
  std::array<bool, sql::kSqlTypeCount> present_{};
};

std::size_t type_index(sql::SqlType t);

/// Fraction of examples whose predicted type equals the gold type.
double type_accuracy(const TypeClassifier& clf, const data::Dataset& ds);

} // namespace ptmaml::relevance
