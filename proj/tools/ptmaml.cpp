#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ptmaml/cli/pipeline.hpp"

using namespace ptmaml;
using nlohmann::json;

namespace {

int exit_code(const std::string& kind) {
  if (kind == "dependency") return 3;
  if (kind == "mismatch") return 4;
  if (kind == "config") return 2;
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptmaml: pseudo-task meta-learning for text-to-SQL"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> work_dir, profile;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs, batch, k;
  std::optional<double> alpha, beta, eta;
  app.add_option("--config", config_path, std::string("JSON config file (default: $") + cli::kConfigEnv + ")");
  app.add_option("--work", work_dir, "Root for data/, checkpoints/ and reports/");
  app.add_option("--profile", profile, "desk|paper, used when no config file sets one");
  app.add_option("--seed", seed, "Run seed");
  app.add_option("--epochs", epochs, "Training epochs");
  app.add_option("--batch", batch, "Task / minibatch size");
  app.add_option("-k,--support", k, "Support set size");
  app.add_option("--alpha", alpha, "Inner step size");
  app.add_option("--beta", beta, "Meta step size");
  app.add_option("--noise-eta", eta, "Gradient noise scale");

  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic raw corpus");
  auto* prep = app.add_subcommand("prep", "Normalize, filter and index the raw corpus");
  auto* rel = app.add_subcommand("train-relevance", "Train the SQL-type classifier");
  auto* tasks = app.add_subcommand("build-tasks", "Build pseudo-tasks from the training split");

  std::string mode = "ptmaml", loss = "sum", split = "test", adapt = "off";
  auto* train = app.add_subcommand("train", "Train one (mode, loss) run");
  train->add_option("--mode", mode, "baseline|ptmaml")->check(CLI::IsMember({"baseline", "ptmaml"}));
  train->add_option("--loss", loss, "pointer|max|sum")->check(CLI::IsMember({"pointer", "max", "sum"}));

  auto* eval = app.add_subcommand("eval", "Evaluate a trained run");
  eval->add_option("--mode", mode, "baseline|ptmaml")->check(CLI::IsMember({"baseline", "ptmaml"}));
  eval->add_option("--loss", loss, "pointer|max|sum")->check(CLI::IsMember({"pointer", "max", "sum"}));
  eval->add_option("--split", split, "train|dev|test")->check(CLI::IsMember({"train", "dev", "test"}));
  eval->add_option("--adapt", adapt, "on|off")->check(CLI::IsMember({"on", "off"}));

  auto* report = app.add_subcommand("report", "Compare finished runs");

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    cli::RunConfig cfg;
    try {
      cfg = cli::load_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
      if (profile && !config_path) cfg = cli::RunConfig::defaults(cli::profile_from_name(*profile));
      if (work_dir) {
        std::filesystem::path w = *work_dir;
        cfg.paths.data = w / "data";
        cfg.paths.checkpoints = w / "checkpoints";
        cfg.paths.reports = w / "reports";
      }
      if (seed) cfg.seed = *seed;
      if (epochs) cfg.meta.epochs = *epochs;
      if (batch) cfg.meta.task_batch = *batch;
      if (k) cfg.meta.k = *k;
      if (alpha) cfg.meta.alpha = *alpha;
      if (beta) cfg.meta.beta = *beta;
      if (eta) cfg.meta.optim.noise_eta = *eta;
      cfg.validate();
    } catch (const cli::CommandError&) {
      throw;
    } catch (const std::exception& e) {
      throw cli::CommandError("config", e.what());
    }

    if (*gen) cli::cmd_gen_synthetic(cfg);
    if (*prep) cli::cmd_prep(cfg);
    if (*rel) cli::cmd_train_relevance(cfg);
    if (*tasks) cli::cmd_build_tasks(cfg);
    if (*train) cli::cmd_train(cfg, meta::mode_from_name(mode), learner::loss_from_name(loss));
    if (*eval) {
      data::Split s = split == "train" ? data::Split::Train : split == "dev" ? data::Split::Dev : data::Split::Test;
      cli::cmd_eval(cfg, meta::mode_from_name(mode), learner::loss_from_name(loss), s, adapt == "on");
    }
    if (*report) cli::cmd_report(cfg);
  } catch (const cli::CommandError& e) {
    std::cerr << e.record(command).dump() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "runtime"}, {"command", command}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
