#include "ptmaml/meta/evaluate.hpp"

#include "ptmaml/data/normalize.hpp"
#include "ptmaml/meta/maml.hpp"
#include "ptmaml/sql/executor.hpp"

namespace ptmaml::meta {

using nlohmann::json;

json Metrics::to_json() const {
  json buckets = json::object();
  for (const auto& [len, b] : per_length) buckets[std::to_string(len)] = json::array({b.count, b.acc()});
  return {{"n", n}, {"acc_lf", acc_lf}, {"acc_ex", acc_ex}, {"truncated", truncated}, {"per_length", buckets}};
}

Metrics Metrics::from_json(const json& j) {
  Metrics m;
  m.n = j.at("n").get<int>();
  m.acc_lf = j.at("acc_lf").get<double>();
  m.acc_ex = j.at("acc_ex").get<double>();
  m.truncated = j.value("truncated", 0);
  for (const auto& [len, b] : j.at("per_length").items()) {
    LengthBucket bucket;
    bucket.count = b.at(0).get<int>();
    bucket.correct = static_cast<int>(std::lround(b.at(1).get<double>() * bucket.count));
    m.per_length[std::stoi(len)] = bucket;
  }
  return m;
}

Metrics score_predictions(const data::Dataset& ds, const std::vector<std::optional<sql::SqlQuery>>& preds) {
  if (preds.size() != ds.examples.size()) throw std::invalid_argument("one prediction per example is required");
  Metrics m;
  int lf = 0, ex = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& e = ds.examples[i];
    const sql::Table& table = ds.table(e.table_id);
    auto& bucket = m.per_length[sql::normalized_sql_length(e.gold)];
    ++bucket.count;
    if (!preds[i]) {
      ++m.truncated;
      // Still surfaces gold execution errors.
      sql::execute(e.gold, table);
      continue;
    }
    bool lf_ok = sql::logical_form_match(*preds[i], e.gold);
    bool ex_ok = sql::execution_match(*preds[i], e.gold, table);
    lf += lf_ok;
    ex += ex_ok;
    bucket.correct += lf_ok;
  }
  m.n = static_cast<int>(preds.size());
  if (m.n > 0) {
    m.acc_lf = static_cast<double>(lf) / m.n;
    m.acc_ex = static_cast<double>(ex) / m.n;
  }
  return m;
}

SupportPool::SupportPool(const data::Dataset& train_, const relevance::TypeClassifier& clf_)
    : train(train_), index(train_, clf_), clf(clf_) {}

std::vector<std::size_t> SupportPool::support_for(const data::Example& ex, int k) const {
  std::vector<std::size_t> out;
  if (k <= 0) return out;
  for (int id : index.top_k(clf.predict(ex.tokens), data::question_length(ex), k)) out.push_back(train.index_of(id));
  return out;
}

learner::Prediction adapt_and_predict(const ad::ParamSet& theta, const learner::Seq2Sql& model,
                                      const data::Example& ex, const SupportPool& pool, const AdaptConfig& cfg) {
  auto support = pool.support_for(ex, cfg.k);
  if (support.empty()) return model.predict(theta, ex);
  LearnerObjective obj(model, pool.train, cfg.loss);
  ad::ParamSet adapted = inner_update(theta, obj, support, cfg.alpha, cfg.steps);
  return model.predict(adapted, ex);
}

Metrics evaluate(const ad::ParamSet& theta, const learner::Seq2Sql& model, const data::Dataset& ds,
                 const SupportPool* pool, const AdaptConfig& cfg) {
  std::vector<std::optional<sql::SqlQuery>> preds;
  preds.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) {
    auto p = pool ? adapt_and_predict(theta, model, ex, *pool, cfg) : model.predict(theta, ex);
    preds.push_back(std::move(p.query));
  }
  return score_predictions(ds, preds);
}

} // namespace ptmaml::meta
