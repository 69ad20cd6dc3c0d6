#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "ptmaml/autodiff/checkpoint.hpp"
#include "ptmaml/cli/pipeline.hpp"
#include "ptmaml/cli/report.hpp"
#include "ptmaml/cli/run_config.hpp"
#include "ptmaml/data/dataset.hpp"
#include "ptmaml/relevance/retrieval.hpp"
#include "temp_dir.hpp"
#include "tiny_pipeline.hpp"

using namespace ptmaml;
using namespace ptmaml::cli;
using ptmaml::testing::slurp;
using ptmaml::testing::TempDir;
using nlohmann::json;

namespace {

std::string kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const CommandError& e) {
    return e.kind();
  }
  return "";
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(PTMAML_TOOL) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("profiles materialize every setting") {
  auto desk = RunConfig::defaults(Profile::Desk);
  CHECK(desk.learner.embed_dim == 32);
  CHECK(desk.learner.hidden_dim == 64);
  CHECK(desk.meta.task_batch == 16);
  CHECK(desk.meta.epochs == 30);
  CHECK(desk.meta.alpha == 0.001);
  CHECK(desk.meta.beta == 0.1);
  CHECK(desk.meta.k == 2);
  auto paper = RunConfig::defaults(Profile::Paper);
  CHECK(paper.learner.hidden_dim == 100);
  CHECK(paper.learner.encoder_layers == 3);
  CHECK(paper.learner.cell == learner::CellKind::Lstm);
  CHECK(paper.meta.task_batch == 200);
  CHECK(paper.meta.epochs == 100);
  CHECK(profile_from_name(profile_name(Profile::Paper)) == Profile::Paper);
}

TEST_CASE("config json round trip, overlay and rejection") {
  TempDir dir("cli");
  auto cfg = ptmaml::testing::tiny_run_config(dir.path(), 4);
  auto back = RunConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  auto partial = RunConfig::from_json(json{{"seed", 9}, {"meta", {{"alpha", 0.01}}}});
  CHECK(partial.seed == 9);
  CHECK(partial.meta.alpha == 0.01);
  CHECK(partial.meta.beta == 0.1);

  auto relative = RunConfig::from_json(RunConfig::defaults(Profile::Desk).to_json());
  relative.paths.data = dir / "elsewhere";
  CHECK(relative.paths.raw_dir() == dir / "elsewhere" / "raw");
  CHECK(relative.paths.raw_tables() == dir / "elsewhere" / "raw" / "tables.jsonl");
  auto pinned = RunConfig::from_json(json{{"paths", {{"examples", "/corpus"}}}});
  CHECK(RunConfig::from_json(pinned.to_json()).paths.raw_dir() == "/corpus");

  CHECK_THROWS(RunConfig::from_json(json{{"sede", 9}}));
  CHECK_THROWS(RunConfig::from_json(json{{"meta", {{"alpah", 0.01}}}}));
  auto bad = cfg;
  bad.meta.beta = -1;
  CHECK_THROWS(bad.validate());

  {
    std::ofstream out(dir / "cfg.json");
    out << json{{"profile", "paper"}, {"seed", 3}}.dump();
  }
  auto loaded = load_config(dir / "cfg.json");
  CHECK(loaded.profile == Profile::Paper);
  CHECK(loaded.seed == 3);
  ::setenv(kConfigEnv, (dir / "cfg.json").c_str(), 1);
  CHECK(load_config(std::nullopt).seed == 3);
  ::unsetenv(kConfigEnv);
  CHECK(load_config(std::nullopt).seed == 1);
}

TEST_CASE("missing prerequisites are dependency errors") {
  TempDir dir("cli");
  auto cfg = ptmaml::testing::tiny_run_config(dir.path());
  CHECK(kind_of([&] { cmd_prep(cfg); }) == "dependency");
  cmd_gen_synthetic(cfg);
  CHECK(kind_of([&] { cmd_train(cfg, meta::Mode::Baseline, learner::LossKind::Sum); }) == "dependency");
  cmd_prep(cfg);
  CHECK(kind_of([&] { cmd_build_tasks(cfg); }) == "dependency");
  CHECK(kind_of([&] { cmd_train(cfg, meta::Mode::PtMaml, learner::LossKind::Sum); }) == "dependency");
  cmd_train(cfg, meta::Mode::Baseline, learner::LossKind::Sum);
  CHECK(kind_of([&] { cmd_eval(cfg, meta::Mode::Baseline, learner::LossKind::Sum, data::Split::Test, true); }) ==
        "dependency");
  CHECK_NOTHROW(cmd_eval(cfg, meta::Mode::Baseline, learner::LossKind::Sum, data::Split::Test, false));
  CHECK(kind_of([&] { cmd_eval(cfg, meta::Mode::PtMaml, learner::LossKind::Max, data::Split::Test, false); }) ==
        "dependency");

  CommandError e("dependency", "missing x", {{"missing", "x"}});
  auto rec = e.record("eval");
  CHECK(rec.at("error") == "dependency");
  CHECK(rec.at("command") == "eval");
}

TEST_CASE("full pipeline: artifacts round-trip and reruns are identical") {
  TempDir a("cli"), b("cli");
  auto ca = ptmaml::testing::tiny_run_config(a.path(), 2);
  auto cb = ptmaml::testing::tiny_run_config(b.path(), 2);
  ptmaml::testing::run_tiny_pipeline(ca);
  ptmaml::testing::run_tiny_pipeline(cb);

  Layout la(ca), lb(cb);
  for (auto mode : {meta::Mode::Baseline, meta::Mode::PtMaml}) {
    for (auto split : {data::Split::Dev, data::Split::Test}) {
      for (bool adapted : {false, true}) {
        auto pa = la.metrics(mode, learner::LossKind::Sum, split, adapted);
        REQUIRE(std::filesystem::exists(pa));
        CHECK(slurp(pa) == slurp(lb.metrics(mode, learner::LossKind::Sum, split, adapted)));
        auto doc = json::parse(slurp(pa));
        auto m = meta::Metrics::from_json(doc.at("metrics"));
        CHECK(m.acc_ex >= m.acc_lf);
      }
    }
    CHECK(slurp(la.params(mode, learner::LossKind::Sum)) == slurp(lb.params(mode, learner::LossKind::Sum)));
  }

  auto tables = sql::read_tables(la.prepared_tables());
  std::map<std::string, sql::Table> by_id;
  for (auto& t : tables) by_id[t.id] = t;
  auto train = data::read_prepared(la.prepared_split(data::Split::Train), by_id, data::Split::Train);
  CHECK(train.examples.size() == 40);
  CHECK(relevance::read_tasks(la.tasks()).tasks.size() == train.examples.size());
  auto clf = relevance::TypeClassifier::load(la.classifier());
  CHECK(relevance::TypeClassifier::from_json(clf.to_json()).to_json() == clf.to_json());
  auto report = meta::TrainReport::from_json(json::parse(slurp(la.train_report(meta::Mode::PtMaml, learner::LossKind::Sum))));
  CHECK(report.epochs.size() == 2);
  CHECK(report.seed == 2);
  CHECK(report.config.at("seed") == 2);
  CHECK(std::filesystem::exists(ca.paths.reports / "comparison.json"));
  auto csv = slurp(ca.paths.reports / "curves.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);
}

TEST_CASE("report tables and deltas") {
  TempDir dir("cli");
  auto cfg = ptmaml::testing::tiny_run_config(dir.path(), 3);
  ptmaml::testing::run_tiny_pipeline(cfg);
  Layout lay(cfg);

  std::vector<RunSummary> runs;
  for (auto mode : {meta::Mode::Baseline, meta::Mode::PtMaml}) {
    RunSummary s;
    s.report = meta::TrainReport::from_json(json::parse(slurp(lay.train_report(mode, learner::LossKind::Sum))));
    s.test_plain = meta::Metrics::from_json(
        json::parse(slurp(lay.metrics(mode, learner::LossKind::Sum, data::Split::Test, false))).at("metrics"));
    runs.push_back(s);
  }
  auto table = comparison_json(runs);
  REQUIRE(table.at("rows").size() == 6);
  CHECK(table.at("rows")[0].at("row") == "Pointer loss");
  CHECK(table.at("rows")[5].at("row") == "Meta + Sum loss");
  CHECK(comparison_text(runs).find("Meta + Sum loss") != std::string::npos);

  auto delta = metrics_delta(*runs[0].test_plain, *runs[0].test_plain);
  CHECK(delta.at("acc_lf") == 0.0);
  CHECK(delta.at("acc_ex") == 0.0);
  for (const auto& [len, d] : delta.at("per_length").items()) CHECK(d == 0.0);

  auto lengths = per_length_csv(runs);
  CHECK(lengths.rfind("run,length,count,acc_lf", 0) == 0);

  auto other = runs;
  other[1].report.fingerprint ^= 1;
  CHECK(kind_of([&] { check_fingerprints(other); }) == "mismatch");
}

TEST_CASE("command-line tool exit codes") {
  TempDir dir("cli");
  const std::string work = "--work " + dir.path().string();
  CHECK(run_tool("--help") == 0);
  CHECK(run_tool(work + " train --mode ptmaml") == 3);
  CHECK(run_tool(work + " --beta -1 prep") == 2);
  CHECK(run_tool(work + " train --mode sgd") != 0);
}
