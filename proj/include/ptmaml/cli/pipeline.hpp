#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ptmaml/cli/run_config.hpp"
#include "ptmaml/meta/evaluate.hpp"
#include "ptmaml/meta/train.hpp"

namespace ptmaml::cli {

/// Failure with a machine-readable kind: "dependency", "config", "data",
/// "mismatch" or "runtime".
class CommandError : public std::runtime_error {
public:
  CommandError(std::string kind, const std::string& what, nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(what), kind_(std::move(kind)), detail_(std::move(detail)) {}
  const std::string& kind() const { return kind_; }
  const nlohmann::json& detail() const { return detail_; }
  nlohmann::json record(std::string_view command) const;

private:
  std::string kind_;
  nlohmann::json detail_;
};

/// Every file a command reads or writes.
struct Layout {
  explicit Layout(const RunConfig& cfg) : cfg_(cfg) {}

  std::filesystem::path raw_split(data::Split s) const;
  std::filesystem::path raw_tables() const { return cfg_.paths.raw_tables(); }
  std::filesystem::path prepared_split(data::Split s) const;
  std::filesystem::path prepared_tables() const { return cfg_.paths.prepared_dir() / "tables.jsonl"; }
  std::filesystem::path vocab() const { return cfg_.paths.prepared_dir() / "vocab.json"; }
  std::filesystem::path classifier() const { return cfg_.paths.checkpoints / "classifier.json"; }
  std::filesystem::path tasks() const { return cfg_.paths.checkpoints / "tasks.jsonl"; }
  std::string run_name(meta::Mode m, learner::LossKind k) const;
  std::filesystem::path params(meta::Mode m, learner::LossKind k) const;
  std::filesystem::path run_reports(meta::Mode m, learner::LossKind k) const;
  std::filesystem::path train_report(meta::Mode m, learner::LossKind k) const;
  std::filesystem::path metrics(meta::Mode m, learner::LossKind k, data::Split s, bool adapted) const;

private:
  const RunConfig& cfg_;
};

/// Writes raw split files and the raw table file.
void cmd_gen_synthetic(const RunConfig& cfg);
/// Normalizes the raw splits, drops uncopyable train examples, and writes
/// prepared splits, normalized tables and the vocabulary.
void cmd_prep(const RunConfig& cfg);
/// Trains and saves the SQL-type classifier; returns dev type accuracy.
double cmd_train_relevance(const RunConfig& cfg);
/// Builds and saves one pseudo-task per training example.
void cmd_build_tasks(const RunConfig& cfg);
/// Trains one (mode, loss) run; saves the best-dev parameters and reports.
meta::TrainReport cmd_train(const RunConfig& cfg, meta::Mode mode, learner::LossKind loss);
/// Evaluates a trained run on a split and writes its metrics file.
meta::Metrics cmd_eval(const RunConfig& cfg, meta::Mode mode, learner::LossKind loss, data::Split split,
                       bool adapt);
/// Collects every finished run and writes the comparison artifacts.
void cmd_report(const RunConfig& cfg);

/// Loads a prepared split with its normalized tables.
data::Dataset load_prepared(const RunConfig& cfg, data::Split s);

} // namespace ptmaml::cli
