#include "ptmaml/meta/train.hpp"

#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "ptmaml/meta/maml.hpp"

namespace ptmaml::meta {

using nlohmann::json;

std::string_view mode_name(Mode m) { return m == Mode::Baseline ? "baseline" : "ptmaml"; }

Mode mode_from_name(std::string_view name) {
  if (name == "baseline") return Mode::Baseline;
  if (name == "ptmaml") return Mode::PtMaml;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (baseline|ptmaml)");
}

double TrainReport::selection_acc(const EpochRecord& r) const {
  if (mode == Mode::PtMaml && r.dev_acc_lf_adapted) return *r.dev_acc_lf_adapted;
  return r.dev_acc_lf;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

} // namespace

json TrainReport::to_json() const {
  json rows = json::array();
  for (const auto& r : epochs) {
    rows.push_back({{"epoch", r.epoch},
                    {"train_loss", r.train_loss},
                    {"train_acc_lf", r.train_acc_lf},
                    {"dev_acc_lf", r.dev_acc_lf},
                    {"dev_acc_ex", r.dev_acc_ex},
                    {"dev_acc_lf_adapted", optional_json(r.dev_acc_lf_adapted)},
                    {"dev_acc_ex_adapted", optional_json(r.dev_acc_ex_adapted)},
                    {"seconds", r.seconds}});
  }
  return {{"format", "ptmaml-train-report"},
          {"version", 1},
          {"mode", mode_name(mode)},
          {"loss", learner::loss_name(loss)},
          {"seed", seed},
          {"fingerprint", fingerprint},
          {"best_epoch", best_epoch},
          {"best_dev_acc_lf", best_dev_acc_lf},
          {"epochs", rows},
          {"config", config}};
}

TrainReport TrainReport::from_json(const json& j) {
  if (j.value("format", "") != "ptmaml-train-report") throw std::runtime_error("not a training report");
  TrainReport r;
  r.mode = mode_from_name(j.at("mode").get<std::string>());
  r.loss = learner::loss_from_name(j.at("loss").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.fingerprint = j.at("fingerprint").get<std::uint64_t>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.best_dev_acc_lf = j.at("best_dev_acc_lf").get<double>();
  r.config = j.value("config", json::object());
  for (const auto& row : j.at("epochs")) {
    EpochRecord e;
    e.epoch = row.at("epoch").get<int>();
    e.train_loss = row.at("train_loss").get<double>();
    e.train_acc_lf = row.at("train_acc_lf").get<double>();
    e.dev_acc_lf = row.at("dev_acc_lf").get<double>();
    e.dev_acc_ex = row.at("dev_acc_ex").get<double>();
    e.dev_acc_lf_adapted = optional_from(row, "dev_acc_lf_adapted");
    e.dev_acc_ex_adapted = optional_from(row, "dev_acc_ex_adapted");
    e.seconds = row.at("seconds").get<double>();
    r.epochs.push_back(e);
  }
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    if (r.epochs[i].epoch != static_cast<int>(i) + 1) throw std::runtime_error("training report epochs are not contiguous");
  }
  return r;
}

std::string TrainReport::to_text() const {
  std::ostringstream out;
  out << mode_name(mode) << " / " << learner::loss_name(loss) << " loss, seed " << seed << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%5s %10s %8s %8s %8s %8s %8s %7s\n", "epoch", "loss", "train", "dev_lf",
                "dev_ex", "adp_lf", "adp_ex", "sec");
  out << line;
  auto opt = [](const std::optional<double>& v) { return v ? *v : -1.0; };
  for (const auto& r : epochs) {
    std::snprintf(line, sizeof line, "%5d %10.4f %8.4f %8.4f %8.4f %8.4f %8.4f %7.1f\n", r.epoch, r.train_loss,
                  r.train_acc_lf, r.dev_acc_lf, r.dev_acc_ex, opt(r.dev_acc_lf_adapted), opt(r.dev_acc_ex_adapted),
                  r.seconds);
    out << line;
  }
  out << "best epoch " << best_epoch << ", dev acc_lf " << best_dev_acc_lf << "\n";
  return out.str();
}

namespace {

json meta_config_json(const MetaConfig& c) {
  return {{"alpha", c.alpha},
          {"beta", c.beta},
          {"k", c.k},
          {"inner_steps", c.inner_steps},
          {"task_batch", c.task_batch},
          {"epochs", c.epochs},
          {"first_order", c.first_order},
          {"average_batch", c.average_batch},
          {"optim",
           {{"learning_rate", c.optim.learning_rate},
            {"epsilon", c.optim.epsilon},
            {"clip_norm", c.optim.clip_norm},
            {"noise_eta", c.optim.noise_eta},
            {"noise_gamma", c.optim.noise_gamma}}}};
}

std::vector<Task> resolve_tasks(const relevance::TaskSet& set, const data::Dataset& train) {
  std::vector<Task> out;
  out.reserve(set.tasks.size());
  for (const auto& t : set.tasks) {
    Task task;
    task.test = train.index_of(t.test_id);
    for (int id : t.support_ids) task.support.push_back(train.index_of(id));
    out.push_back(std::move(task));
  }
  return out;
}

data::Dataset head(const data::Dataset& ds, int n) {
  data::Dataset out;
  out.split = ds.split;
  out.tables = ds.tables;
  std::size_t count = std::min(ds.examples.size(), static_cast<std::size_t>(std::max(n, 0)));
  out.examples.assign(ds.examples.begin(), ds.examples.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

} // namespace

TrainResult train(ad::ParamSet theta, const TrainInputs& in, const MetaConfig& cfg, Mode mode, learner::LossKind loss,
                  std::uint64_t seed, const TrainOptions& opts) {
  cfg.validate();
  std::vector<Task> tasks;
  if (mode == Mode::PtMaml) {
    if (!in.tasks) throw std::invalid_argument("ptmaml training needs a task set");
    tasks = resolve_tasks(*in.tasks, in.train);
    if (tasks.empty()) throw std::invalid_argument("ptmaml training needs at least one task");
  }
  if (in.train.examples.empty()) throw std::invalid_argument("training split is empty");

  LearnerObjective obj(in.model, in.train, loss);
  std::optional<SupportPool> pool;
  if (mode == Mode::PtMaml && opts.eval_adapted && in.clf) pool.emplace(in.train, *in.clf);
  AdaptConfig adapt{cfg.k, cfg.alpha, cfg.inner_steps, loss};
  const data::Dataset train_eval = head(in.train, opts.train_eval_size);

  std::mt19937_64 order_rng(seed);
  std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ad::AdagradState state = ad::AdagradState::fresh(theta);

  TrainResult result;
  result.report.mode = mode;
  result.report.loss = loss;
  result.report.seed = seed;
  result.report.fingerprint = data::dataset_fingerprint(in.train);
  result.report.config = {{"meta", meta_config_json(cfg)}};
  result.best_params = theta;
  bool have_best = false;

  const std::size_t n = mode == Mode::PtMaml ? tasks.size() : in.train.examples.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.task_batch);
  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n; b += batch) {
      std::span<const std::size_t> chunk(order.data() + b, std::min(batch, n - b));
      if (mode == Mode::Baseline) {
        loss_sum += baseline_step(theta, obj, chunk, cfg, state, noise_rng).loss;
      } else {
        std::vector<Task> picked;
        picked.reserve(chunk.size());
        for (std::size_t i : chunk) picked.push_back(tasks[i]);
        loss_sum += meta_batch_step(theta, obj, picked, cfg, state, noise_rng).loss;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    if (!train_eval.examples.empty()) rec.train_acc_lf = evaluate(theta, in.model, train_eval).acc_lf;
    Metrics dev = evaluate(theta, in.model, in.dev);
    rec.dev_acc_lf = dev.acc_lf;
    rec.dev_acc_ex = dev.acc_ex;
    if (pool) {
      Metrics adapted = evaluate(theta, in.model, in.dev, &*pool, adapt);
      rec.dev_acc_lf_adapted = adapted.acc_lf;
      rec.dev_acc_ex_adapted = adapted.acc_ex;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double sel = result.report.selection_acc(rec);
    if (!have_best || sel > result.report.best_dev_acc_lf) {
      have_best = true;
      result.report.best_epoch = epoch;
      result.report.best_dev_acc_lf = sel;
      result.best_params = theta;
    }
    result.report.epochs.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec);
  }
  result.final_params = std::move(theta);
  return result;
}

} // namespace ptmaml::meta
