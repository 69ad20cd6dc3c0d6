#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ptmaml/data/dataset.hpp"
#include "ptmaml/relevance/classifier.hpp"

namespace ptmaml::relevance {

/// 1 - |len(a) - len(b)| when both have the same predicted type, otherwise
/// no score (the pair is excluded).
std::optional<double> relevance_score(const TypeClassifier& clf, const data::Example& a, const data::Example& b);

/// Precomputed (id, type, length) view of a retrieval pool.
class SupportIndex {
public:
  struct Entry {
    int id;
    sql::SqlType type;
    int length;
  };

  /// Types are predicted by `clf`, or taken from the gold queries when
  /// `gold_types` is set.
  SupportIndex(const data::Dataset& pool, const TypeClassifier& clf, bool gold_types = false);

  /// The k highest-scoring entries of type `type`; ties go to the smaller
  /// |length difference|, then the smaller id. Returns every same-type
  /// entry when fewer than k exist. `exclude` is never returned.
  std::vector<int> top_k(sql::SqlType type, int length, int k, std::optional<int> exclude = std::nullopt) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& entry(int id) const;

private:
  std::vector<Entry> entries_;
};

/// Support set for train example `query_id`, drawn from the rest of `train`.
std::vector<int> top_k_support(const data::Dataset& train, int query_id, int k, const TypeClassifier& clf);

/// Support set for an arbitrary (e.g. held-out) example, drawn from `train`.
std::vector<int> top_k_support_for(const data::Example& query, const data::Dataset& train, int k,
                                   const TypeClassifier& clf);

struct PseudoTask {
  std::vector<int> support_ids;
  int test_id = 0;
  friend bool operator==(const PseudoTask&, const PseudoTask&) = default;
};

struct TaskSet {
  std::vector<PseudoTask> tasks;  // in train-split order
  friend bool operator==(const TaskSet&, const TaskSet&) = default;
};

/// One task per training example, with that example as the test item and
/// its top-k relevant neighbours as support.
TaskSet build_pseudo_tasks(const data::Dataset& train, int k, const TypeClassifier& clf, bool gold_types = false);

/// JSON-lines {"test_id": int, "support_ids": [int]}.
void write_tasks(const std::filesystem::path& path, const TaskSet& tasks);
TaskSet read_tasks(const std::filesystem::path& path);

} // namespace ptmaml::relevance
