#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptmaml/meta/evaluate.hpp"
#include "ptmaml/meta/train.hpp"

namespace ptmaml::cli {

/// One finished run: its training report and any test metrics.
struct RunSummary {
  meta::TrainReport report;
  std::optional<meta::Metrics> test_plain;
  std::optional<meta::Metrics> test_adapted;

  std::string label() const;
  /// The headline test metrics: adapted for meta runs when present.
  const meta::Metrics* headline() const;
};

/// Throws CommandError("mismatch") when runs were trained on different data.
void check_fingerprints(const std::vector<RunSummary>& runs);

/// {baseline, meta} x {pointer, max, sum} with acc_lf / acc_ex per cell.
nlohmann::json comparison_json(const std::vector<RunSummary>& runs);
std::string comparison_text(const std::vector<RunSummary>& runs);

/// run,mode,loss,seed,epoch,train_loss,train_acc_lf,dev_acc_lf,dev_acc_ex,dev_acc_lf_adapted
std::string curves_csv(const std::vector<RunSummary>& runs);
/// run,length,count,acc_lf
std::string per_length_csv(const std::vector<RunSummary>& runs);

/// Field-wise differences b - a of two metrics (acc_lf, acc_ex and every
/// shared length bucket).
nlohmann::json metrics_delta(const meta::Metrics& a, const meta::Metrics& b);

} // namespace ptmaml::cli
