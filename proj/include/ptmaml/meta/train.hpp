#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptmaml/meta/config.hpp"
#include "ptmaml/meta/evaluate.hpp"

namespace ptmaml::meta {

enum class Mode { Baseline, PtMaml };
std::string_view mode_name(Mode m);  // "baseline", "ptmaml"
Mode mode_from_name(std::string_view name);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc_lf = 0.0;  // on the train evaluation subset
  double dev_acc_lf = 0.0;
  double dev_acc_ex = 0.0;
  std::optional<double> dev_acc_lf_adapted;
  std::optional<double> dev_acc_ex_adapted;
  double seconds = 0.0;
};

struct TrainReport {
  Mode mode = Mode::Baseline;
  learner::LossKind loss = learner::LossKind::Sum;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;  // of the training split
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_acc_lf = 0.0;
  nlohmann::json config;

  /// Dev accuracy used for checkpoint selection: adapted for ptmaml runs
  /// when it was measured, plain otherwise.
  double selection_acc(const EpochRecord& r) const;

  nlohmann::json to_json() const;
  static TrainReport from_json(const nlohmann::json& j);
  /// Fixed-width per-epoch table.
  std::string to_text() const;
};

struct TrainInputs {
  const learner::Seq2Sql& model;
  const data::Dataset& train;
  const data::Dataset& dev;
  const relevance::TypeClassifier* clf = nullptr;  // needed for adapted dev evaluation
  const relevance::TaskSet* tasks = nullptr;       // needed in ptmaml mode
};

struct TrainOptions {
  bool eval_adapted = true;  // adapted dev accuracy each epoch (needs clf)
  int train_eval_size = 100; // first n train examples scored each epoch; 0 skips
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  ad::ParamSet final_params;
  ad::ParamSet best_params;
  TrainReport report;
};

/// Epochs of minibatch training (baseline) or meta_batch_step over tasks in
/// a fresh uniform order each epoch (ptmaml). Both modes draw the order from
/// the same seeded stream, so ptmaml with alpha = 0 reproduces the baseline
/// when the tasks are listed in train order.
TrainResult train(ad::ParamSet theta, const TrainInputs& in, const MetaConfig& cfg, Mode mode,
                  learner::LossKind loss, std::uint64_t seed, const TrainOptions& opts = {});

} // namespace ptmaml::meta
