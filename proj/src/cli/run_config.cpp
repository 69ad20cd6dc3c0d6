#include "ptmaml/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

namespace ptmaml::cli {

using nlohmann::json;

std::string_view profile_name(Profile p) { return p == Profile::Desk ? "desk" : "paper"; }

Profile profile_from_name(std::string_view name) {
  if (name == "desk") return Profile::Desk;
  if (name == "paper") return Profile::Paper;
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (desk|paper)");
}

RunConfig RunConfig::defaults(Profile p) {
  RunConfig c;
  c.profile = p;
  if (p == Profile::Paper) {
    c.learner.embed_dim = 100;
    c.learner.hidden_dim = 100;
    c.learner.encoder_layers = 3;
    c.learner.decoder_layers = 3;
    c.learner.cell = learner::CellKind::Lstm;
    c.meta.task_batch = 200;
    c.meta.epochs = 100;
  }
  return c;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config section '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument("unknown config key '" + where + key + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void take_path(const json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, {"profile", "seed", "paths", "synth", "classifier", "learner", "meta", "gold_types",
                 "train_eval_size", "adapt"},
             "");
  RunConfig c = defaults(profile_from_name(j.value("profile", std::string("desk"))));
  take(j, "seed", c.seed);
  take(j, "gold_types", c.gold_types);
  take(j, "train_eval_size", c.train_eval_size);
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    check_keys(p, {"data", "checkpoints", "reports", "examples", "tables"}, "paths.");
    take_path(p, "data", c.paths.data);
    take_path(p, "checkpoints", c.paths.checkpoints);
    take_path(p, "reports", c.paths.reports);
    take_path(p, "examples", c.paths.examples);
    take_path(p, "tables", c.paths.tables);
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    check_keys(s, {"n_tables", "rows_per_table", "n_train", "n_dev", "n_test", "entity_vocab", "max_number",
                   "max_conditions"},
               "synth.");
    take(s, "n_tables", c.synth.n_tables);
    take(s, "rows_per_table", c.synth.rows_per_table);
    take(s, "n_train", c.synth.n_train);
    take(s, "n_dev", c.synth.n_dev);
    take(s, "n_test", c.synth.n_test);
    take(s, "entity_vocab", c.synth.entity_vocab);
    take(s, "max_number", c.synth.max_number);
    take(s, "max_conditions", c.synth.max_conditions);
  }
  if (j.contains("classifier")) {
    const json& s = j.at("classifier");
    check_keys(s, {"epochs", "learning_rate", "reg"}, "classifier.");
    take(s, "epochs", c.classifier.epochs);
    take(s, "learning_rate", c.classifier.learning_rate);
    take(s, "reg", c.classifier.reg);
  }
  if (j.contains("learner")) {
    const json& s = j.at("learner");
    check_keys(s, {"embed_dim", "hidden_dim", "encoder_layers", "decoder_layers", "cell", "loss", "max_decode_len"},
               "learner.");
    take(s, "embed_dim", c.learner.embed_dim);
    take(s, "hidden_dim", c.learner.hidden_dim);
    take(s, "encoder_layers", c.learner.encoder_layers);
    take(s, "decoder_layers", c.learner.decoder_layers);
    take(s, "max_decode_len", c.learner.max_decode_len);
    if (s.contains("cell")) c.learner.cell = learner::cell_from_name(s.at("cell").get<std::string>());
    if (s.contains("loss")) c.learner.loss = learner::loss_from_name(s.at("loss").get<std::string>());
  }
  if (j.contains("meta")) {
    const json& s = j.at("meta");
    check_keys(s, {"alpha", "beta", "k", "inner_steps", "task_batch", "epochs", "first_order", "average_batch",
                   "optim"},
               "meta.");
    take(s, "alpha", c.meta.alpha);
    take(s, "beta", c.meta.beta);
    take(s, "k", c.meta.k);
    take(s, "inner_steps", c.meta.inner_steps);
    take(s, "task_batch", c.meta.task_batch);
    take(s, "epochs", c.meta.epochs);
    take(s, "first_order", c.meta.first_order);
    take(s, "average_batch", c.meta.average_batch);
    if (s.contains("optim")) {
      const json& o = s.at("optim");
      check_keys(o, {"learning_rate", "epsilon", "clip_norm", "noise_eta", "noise_gamma"}, "meta.optim.");
      take(o, "learning_rate", c.meta.optim.learning_rate);
      take(o, "epsilon", c.meta.optim.epsilon);
      take(o, "clip_norm", c.meta.optim.clip_norm);
      take(o, "noise_eta", c.meta.optim.noise_eta);
      take(o, "noise_gamma", c.meta.optim.noise_gamma);
    }
  }
  if (j.contains("adapt")) {
    const json& s = j.at("adapt");
    check_keys(s, {"k", "alpha", "steps"}, "adapt.");
    if (s.contains("k")) c.adapt_k = s.at("k").get<int>();
    if (s.contains("alpha")) c.adapt_alpha = s.at("alpha").get<double>();
    if (s.contains("steps")) c.adapt_steps = s.at("steps").get<int>();
  }
  return c;
}

json RunConfig::to_json() const {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json adapt = {{"k", opt(adapt_k)}, {"alpha", opt(adapt_alpha)}, {"steps", opt(adapt_steps)}};
  for (auto it = adapt.begin(); it != adapt.end();) it = it->is_null() ? adapt.erase(it) : std::next(it);
  return {
      {"profile", profile_name(profile)},
      {"seed", seed},
      {"gold_types", gold_types},
      {"train_eval_size", train_eval_size},
      {"paths",
       {{"data", paths.data.string()},
        {"checkpoints", paths.checkpoints.string()},
        {"reports", paths.reports.string()},
        // empty means "under data/raw"; writing the derived value would pin it
        {"examples", paths.examples.string()},
        {"tables", paths.tables.string()}}},
      {"synth",
       {{"n_tables", synth.n_tables},
        {"rows_per_table", synth.rows_per_table},
        {"n_train", synth.n_train},
        {"n_dev", synth.n_dev},
        {"n_test", synth.n_test},
        {"entity_vocab", synth.entity_vocab},
        {"max_number", synth.max_number},
        {"max_conditions", synth.max_conditions}}},
      {"classifier",
       {{"epochs", classifier.epochs}, {"learning_rate", classifier.learning_rate}, {"reg", classifier.reg}}},
      {"learner",
       {{"embed_dim", learner.embed_dim},
        {"hidden_dim", learner.hidden_dim},
        {"encoder_layers", learner.encoder_layers},
        {"decoder_layers", learner.decoder_layers},
        {"cell", learner::cell_name(learner.cell)},
        {"loss", learner::loss_name(learner.loss)},
        {"max_decode_len", learner.max_decode_len}}},
      {"meta",
       {{"alpha", meta.alpha},
        {"beta", meta.beta},
        {"k", meta.k},
        {"inner_steps", meta.inner_steps},
        {"task_batch", meta.task_batch},
        {"epochs", meta.epochs},
        {"first_order", meta.first_order},
        {"average_batch", meta.average_batch},
        {"optim",
         {{"learning_rate", meta.optim.learning_rate},
          {"epsilon", meta.optim.epsilon},
          {"clip_norm", meta.optim.clip_norm},
          {"noise_eta", meta.optim.noise_eta},
          {"noise_gamma", meta.optim.noise_gamma}}}}},
      {"adapt", adapt},
  };
}

void RunConfig::validate() const {
  synth.validate();
  learner.validate();
  meta.validate();
  if (train_eval_size < 0) throw std::invalid_argument("train_eval_size must be nonnegative");
  if (adapt_k && *adapt_k < 0) throw std::invalid_argument("adapt.k must be nonnegative");
  if (adapt_steps && *adapt_steps <= 0) throw std::invalid_argument("adapt.steps must be positive");
  if (adapt_alpha && !(*adapt_alpha >= 0.0)) throw std::invalid_argument("adapt.alpha must be nonnegative");
}

RunConfig load_config(const std::optional<std::filesystem::path>& path) {
  std::optional<std::filesystem::path> p = path;
  if (!p) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) p = env;
  }
  if (!p) return RunConfig::defaults(Profile::Desk);
  std::ifstream in(*p);
  if (!in) throw std::runtime_error("cannot read config " + p->string());
  return RunConfig::from_json(json::parse(in));
}

} // namespace ptmaml::cli
