#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ptmaml/cli/pipeline.hpp"
#include "ptmaml/cli/run_config.hpp"

namespace ptmaml::testing {

/// Desk profile shrunk so a full pipeline runs in seconds.
inline cli::RunConfig tiny_run_config(const std::filesystem::path& root, std::uint64_t seed = 1) {
  auto cfg = cli::RunConfig::defaults(cli::Profile::Desk);
  cfg.seed = seed;
  cfg.paths.data = root / "data";
  cfg.paths.checkpoints = root / "checkpoints";
  cfg.paths.reports = root / "reports";
  cfg.synth.n_tables = 10;
  cfg.synth.rows_per_table = 6;
  cfg.synth.n_train = 40;
  cfg.synth.n_dev = 12;
  cfg.synth.n_test = 12;
  cfg.synth.entity_vocab = 60;
  cfg.learner.embed_dim = 8;
  cfg.learner.hidden_dim = 8;
  cfg.meta.epochs = 2;
  cfg.meta.task_batch = 8;
  cfg.train_eval_size = 10;
  return cfg;
}

/// gen-synthetic, prep, train-relevance, build-tasks, then train and
/// evaluate baseline and ptmaml with the Sum loss.
inline void run_tiny_pipeline(const cli::RunConfig& cfg) {
  using learner::LossKind;
  using meta::Mode;
  cli::cmd_gen_synthetic(cfg);
  cli::cmd_prep(cfg);
  cli::cmd_train_relevance(cfg);
  cli::cmd_build_tasks(cfg);
  for (auto mode : {Mode::Baseline, Mode::PtMaml}) {
    cli::cmd_train(cfg, mode, LossKind::Sum);
    for (auto split : {data::Split::Dev, data::Split::Test}) {
      cli::cmd_eval(cfg, mode, LossKind::Sum, split, false);
      cli::cmd_eval(cfg, mode, LossKind::Sum, split, true);
    }
  }
  cli::cmd_report(cfg);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace ptmaml::testing
