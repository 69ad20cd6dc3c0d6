#include "ptmaml/cli/pipeline.hpp"

#include <fstream>
#include <iostream>

#include "ptmaml/autodiff/checkpoint.hpp"
#include "ptmaml/cli/report.hpp"
#include "ptmaml/data/normalize.hpp"
#include "ptmaml/relevance/retrieval.hpp"

namespace ptmaml::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json CommandError::record(std::string_view command) const {
  return {{"error", kind_}, {"command", command}, {"message", what()}, {"detail", detail_}};
}

std::filesystem::path Layout::raw_split(data::Split s) const {
  return cfg_.paths.raw_dir() / (std::string(data::split_name(s)) + ".jsonl");
}

std::filesystem::path Layout::prepared_split(data::Split s) const {
  return cfg_.paths.prepared_dir() / (std::string(data::split_name(s)) + ".jsonl");
}

std::string Layout::run_name(meta::Mode m, learner::LossKind k) const {
  return std::string(meta::mode_name(m)) + "-" + std::string(learner::loss_name(k));
}

std::filesystem::path Layout::params(meta::Mode m, learner::LossKind k) const {
  return cfg_.paths.checkpoints / run_name(m, k) / "params.json";
}

std::filesystem::path Layout::run_reports(meta::Mode m, learner::LossKind k) const {
  return cfg_.paths.reports / run_name(m, k);
}

std::filesystem::path Layout::train_report(meta::Mode m, learner::LossKind k) const {
  return run_reports(m, k) / "train_report.json";
}

std::filesystem::path Layout::metrics(meta::Mode m, learner::LossKind k, data::Split s, bool adapted) const {
  return run_reports(m, k) /
         ("metrics-" + std::string(data::split_name(s)) + (adapted ? "-adapted" : "-plain") + ".json");
}

namespace {

constexpr data::Split kSplits[] = {data::Split::Train, data::Split::Dev, data::Split::Test};

void require(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p)) {
    throw CommandError("dependency", "missing " + p.string() + " (run '" + producer + "' first)",
                       {{"missing", p.string()}, {"producer", producer}});
  }
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw CommandError("runtime", "cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw CommandError("dependency", "cannot read " + p.string(), {{"missing", p.string()}});
  return json::parse(in);
}

void log_config(const RunConfig& cfg, std::string_view command) {
  std::cerr << "[" << command << "] seed " << cfg.seed << " raw " << cfg.paths.raw_dir().string() << " config "
            << cfg.to_json().dump() << "\n";
}

std::map<std::string, sql::Table> load_prepared_tables(const RunConfig& cfg) {
  Layout lay(cfg);
  require(lay.prepared_tables(), "prep");
  std::map<std::string, sql::Table> tables;
  for (auto& t : sql::read_tables(lay.prepared_tables())) tables.emplace(t.id, std::move(t));
  return tables;
}

learner::Seq2Sql make_model(const RunConfig& cfg) {
  Layout lay(cfg);
  require(lay.vocab(), "prep");
  return learner::Seq2Sql(cfg.learner, learner::Vocab::load(lay.vocab()));
}

meta::AdaptConfig adapt_config(const RunConfig& cfg, learner::LossKind loss) {
  return {cfg.adapt_k.value_or(cfg.meta.k), cfg.adapt_alpha.value_or(cfg.meta.alpha),
          cfg.adapt_steps.value_or(cfg.meta.inner_steps), loss};
}

} // namespace

data::Dataset load_prepared(const RunConfig& cfg, data::Split s) {
  Layout lay(cfg);
  require(lay.prepared_split(s), "prep");
  return data::read_prepared(lay.prepared_split(s), load_prepared_tables(cfg), s);
}

void cmd_gen_synthetic(const RunConfig& cfg) {
  log_config(cfg, "gen-synthetic");
  data::SynthConfig sc = cfg.synth;
  sc.seed = cfg.synth_seed();
  auto corpus = data::generate_synthetic(sc);
  Layout lay(cfg);
  fs::create_directories(cfg.paths.raw_dir());
  data::write_raw_examples(lay.raw_split(data::Split::Train), corpus.raw_train);
  data::write_raw_examples(lay.raw_split(data::Split::Dev), corpus.raw_dev);
  data::write_raw_examples(lay.raw_split(data::Split::Test), corpus.raw_test);
  fs::create_directories(lay.raw_tables().parent_path());
  sql::write_tables(lay.raw_tables(), corpus.tables);
}

void cmd_prep(const RunConfig& cfg) {
  log_config(cfg, "prep");
  Layout lay(cfg);
  require(lay.raw_tables(), "gen-synthetic");
  std::map<std::string, sql::Table> tables;
  std::vector<data::Dataset> splits;
  for (auto s : kSplits) {
    require(lay.raw_split(s), "gen-synthetic");
    data::Dataset ds = data::filter_copyable(data::load_dataset(lay.raw_split(s), lay.raw_tables(), s));
    std::cerr << "[prep] " << data::split_name(s) << ": " << ds.examples.size() << " examples\n";
    for (const auto& [id, t] : ds.tables) tables.emplace(id, t);
    splits.push_back(std::move(ds));
  }
  fs::create_directories(cfg.paths.prepared_dir());
  for (std::size_t i = 0; i < splits.size(); ++i) data::write_prepared(lay.prepared_split(kSplits[i]), splits[i]);
  std::vector<sql::Table> flat;
  for (auto& [id, t] : tables) flat.push_back(t);
  sql::write_tables(lay.prepared_tables(), flat);
  learner::Vocab::build(splits[0]).save(lay.vocab());
}

double cmd_train_relevance(const RunConfig& cfg) {
  log_config(cfg, "train-relevance");
  Layout lay(cfg);
  auto train = load_prepared(cfg, data::Split::Train);
  auto dev = load_prepared(cfg, data::Split::Dev);
  relevance::ClassifierConfig cc = cfg.classifier;
  cc.seed = cfg.seed;
  auto clf = relevance::TypeClassifier::train(train, cc);
  fs::create_directories(cfg.paths.checkpoints);
  clf.save(lay.classifier());
  double acc = relevance::type_accuracy(clf, dev);
  std::cerr << "[train-relevance] dev type accuracy " << acc << "\n";
  return acc;
}

void cmd_build_tasks(const RunConfig& cfg) {
  log_config(cfg, "build-tasks");
  Layout lay(cfg);
  require(lay.classifier(), "train-relevance");
  auto train = load_prepared(cfg, data::Split::Train);
  auto clf = relevance::TypeClassifier::load(lay.classifier());
  auto tasks = relevance::build_pseudo_tasks(train, cfg.meta.k, clf, cfg.gold_types);
  relevance::write_tasks(lay.tasks(), tasks);
}

meta::TrainReport cmd_train(const RunConfig& cfg, meta::Mode mode, learner::LossKind loss) {
  log_config(cfg, "train");
  Layout lay(cfg);
  auto train = load_prepared(cfg, data::Split::Train);
  auto dev = load_prepared(cfg, data::Split::Dev);
  auto model = make_model(cfg);

  std::optional<relevance::TypeClassifier> clf;
  std::optional<relevance::TaskSet> tasks;
  if (mode == meta::Mode::PtMaml) {
    require(lay.classifier(), "train-relevance");
    require(lay.tasks(), "build-tasks");
    clf = relevance::TypeClassifier::load(lay.classifier());
    tasks = relevance::read_tasks(lay.tasks());
  }
  meta::TrainInputs in{model, train, dev, clf ? &*clf : nullptr, tasks ? &*tasks : nullptr};
  meta::TrainOptions opts;
  opts.train_eval_size = cfg.train_eval_size;
  opts.on_epoch = [&](const meta::EpochRecord& r) {
    std::cerr << "[train " << lay.run_name(mode, loss) << "] epoch " << r.epoch << " loss " << r.train_loss
              << " dev acc_lf " << r.dev_acc_lf;
    if (r.dev_acc_lf_adapted) std::cerr << " adapted " << *r.dev_acc_lf_adapted;
    std::cerr << "\n";
  };
  auto result = meta::train(model.init_params(cfg.init_seed()), in, cfg.meta, mode, loss, cfg.train_seed(), opts);
  result.report.config = cfg.to_json();
  result.report.seed = cfg.seed;

  fs::create_directories(lay.params(mode, loss).parent_path());
  ad::save_params(lay.params(mode, loss), result.best_params);
  model.vocab().save(lay.params(mode, loss).parent_path() / "vocab.json");
  write_json(lay.train_report(mode, loss), result.report.to_json());
  write_text(lay.run_reports(mode, loss) / "train_report.txt", result.report.to_text());
  return result.report;
}

meta::Metrics cmd_eval(const RunConfig& cfg, meta::Mode mode, learner::LossKind loss, data::Split split,
                       bool adapt) {
  log_config(cfg, "eval");
  Layout lay(cfg);
  require(lay.params(mode, loss), "train --mode " + std::string(meta::mode_name(mode)) + " --loss " +
                                      std::string(learner::loss_name(loss)));
  std::optional<relevance::TypeClassifier> clf;
  if (adapt) {
    require(lay.classifier(), "train-relevance");
    clf = relevance::TypeClassifier::load(lay.classifier());
  }
  auto train = load_prepared(cfg, data::Split::Train);
  auto ds = load_prepared(cfg, split);
  auto model = make_model(cfg);
  auto theta = ad::load_params(lay.params(mode, loss));
  if (!theta.same_layout(model.init_params(0))) {
    throw CommandError("mismatch", "checkpoint " + lay.params(mode, loss).string() +
                                       " does not match the configured learner");
  }
  std::optional<meta::SupportPool> pool;
  if (clf) pool.emplace(train, *clf);
  meta::Metrics m = meta::evaluate(theta, model, ds, pool ? &*pool : nullptr, adapt_config(cfg, loss));
  json doc = {{"format", "ptmaml-metrics"},
              {"version", 1},
              {"run", lay.run_name(mode, loss)},
              {"mode", meta::mode_name(mode)},
              {"loss", learner::loss_name(loss)},
              {"split", data::split_name(split)},
              {"adapted", adapt},
              {"seed", cfg.seed},
              {"train_fingerprint", data::dataset_fingerprint(train)},
              {"eval_fingerprint", data::dataset_fingerprint(ds)},
              {"metrics", m.to_json()}};
  write_json(lay.metrics(mode, loss, split, adapt), doc);
  std::cerr << "[eval " << lay.run_name(mode, loss) << "] " << data::split_name(split)
            << (adapt ? " adapted" : " plain") << " acc_lf " << m.acc_lf << " acc_ex " << m.acc_ex << "\n";
  return m;
}

void cmd_report(const RunConfig& cfg) {
  log_config(cfg, "report");
  Layout lay(cfg);
  std::vector<RunSummary> runs;
  for (auto mode : {meta::Mode::Baseline, meta::Mode::PtMaml}) {
    for (auto loss : {learner::LossKind::Pointer, learner::LossKind::Max, learner::LossKind::Sum}) {
      if (!fs::exists(lay.train_report(mode, loss))) continue;
      RunSummary s;
      s.report = meta::TrainReport::from_json(read_json(lay.train_report(mode, loss)));
      for (bool adapted : {false, true}) {
        fs::path p = lay.metrics(mode, loss, data::Split::Test, adapted);
        if (!fs::exists(p)) continue;
        json doc = read_json(p);
        if (doc.at("train_fingerprint").get<std::uint64_t>() != s.report.fingerprint) {
          throw CommandError("mismatch", p.string() + " was evaluated against different training data");
        }
        (adapted ? s.test_adapted : s.test_plain) = meta::Metrics::from_json(doc.at("metrics"));
      }
      runs.push_back(std::move(s));
    }
  }
  if (runs.empty()) throw CommandError("dependency", "no finished training runs under " + cfg.paths.reports.string(),
                                       {{"producer", "train"}});
  check_fingerprints(runs);
  json table = comparison_json(runs);
  table["config"] = cfg.to_json();
  write_json(cfg.paths.reports / "comparison.json", table);
  write_text(cfg.paths.reports / "comparison.txt", comparison_text(runs));
  write_text(cfg.paths.reports / "curves.csv", curves_csv(runs));
  write_text(cfg.paths.reports / "per_length.csv", per_length_csv(runs));
  std::cout << comparison_text(runs);
}

} // namespace ptmaml::cli
