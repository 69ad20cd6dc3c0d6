#pragma once

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ptmaml/data/dataset.hpp"
#include "ptmaml/learner/model.hpp"
#include "ptmaml/relevance/retrieval.hpp"

namespace ptmaml::meta {

struct LengthBucket {
  int count = 0;
  int correct = 0;  // logical-form matches
  double acc() const { return count ? static_cast<double>(correct) / count : 0.0; }
  friend bool operator==(const LengthBucket&, const LengthBucket&) = default;
};

struct Metrics {
  int n = 0;
  double acc_lf = 0.0;
  double acc_ex = 0.0;
  int truncated = 0;
  std::map<int, LengthBucket> per_length;  // keyed by normalized gold length

  /// {"n", "acc_lf", "acc_ex", "truncated", "per_length": {"len": [count, acc]}}
  nlohmann::json to_json() const;
  static Metrics from_json(const nlohmann::json& j);
};

/// Scores one prediction per example; an empty prediction is wrong.
Metrics score_predictions(const data::Dataset& ds, const std::vector<std::optional<sql::SqlQuery>>& preds);

/// Test-time adaptation settings; they default to the training values.
struct AdaptConfig {
  int k = 2;
  double alpha = 0.001;
  int steps = 1;
  learner::LossKind loss = learner::LossKind::Sum;
};

/// Retrieval pool for adaptation: the training split and its index.
struct SupportPool {
  const data::Dataset& train;
  relevance::SupportIndex index;
  const relevance::TypeClassifier& clf;

  SupportPool(const data::Dataset& train, const relevance::TypeClassifier& clf);
  /// Support positions (into train.examples) for a held-out example.
  std::vector<std::size_t> support_for(const data::Example& ex, int k) const;
};

/// Adapts a copy of theta on the retrieved support and decodes. With no
/// same-type candidates (or k = 0) it decodes with theta itself.
learner::Prediction adapt_and_predict(const ad::ParamSet& theta, const learner::Seq2Sql& model,
                                      const data::Example& ex, const SupportPool& pool, const AdaptConfig& cfg);

/// Plain evaluation when `pool` is null, adapted otherwise.
Metrics evaluate(const ad::ParamSet& theta, const learner::Seq2Sql& model, const data::Dataset& ds,
                 const SupportPool* pool = nullptr, const AdaptConfig& cfg = {});

} // namespace ptmaml::meta
