#include "ptmaml/relevance/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>

namespace ptmaml::relevance {

using nlohmann::json;

std::size_t type_index(sql::SqlType t) { return static_cast<std::size_t>(t); }

namespace {

using Features = std::vector<std::pair<std::size_t, double>>;

Features featurize(const std::vector<std::string>& tokens,
                   const std::unordered_map<std::string, std::size_t>& index) {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    auto it = index.find(t);
    if (it != index.end()) counts[it->second] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

} // namespace

TypeClassifier TypeClassifier::train(const data::Dataset& train, const ClassifierConfig& cfg) {
  TypeClassifier clf;
  for (const auto& ex : train.examples) {
    for (const auto& t : ex.tokens) {
      if (clf.index_.emplace(t, clf.vocab_.size()).second) clf.vocab_.push_back(t);
    }
  }
  for (auto& w : clf.weights_) w.assign(clf.vocab_.size(), 0.0);

  std::vector<Features> xs;
  std::vector<std::size_t> labels;
  for (const auto& ex : train.examples) {
    xs.push_back(featurize(ex.tokens, clf.index_));
    labels.push_back(type_index(sql::sql_type_of(ex.gold)));
    clf.present_[labels.back()] = true;
  }
  for (sql::SqlType t : clf.missing_types()) {
    std::cerr << "warning: no training examples of type " << sql::type_name(t) << "; it will never be predicted\n";
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double lr = cfg.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t i : order) {
      for (std::size_t c = 0; c < sql::kSqlTypeCount; ++c) {
        if (!clf.present_[c]) continue;
        double y = labels[i] == c ? 1.0 : -1.0;
        auto& w = clf.weights_[c];
        double margin = clf.bias_[c];
        for (auto [f, v] : xs[i]) margin += w[f] * v;
        double shrink = 1.0 - lr * cfg.reg;
        for (double& wv : w) wv *= shrink;
        if (y * margin < 1.0) {
          for (auto [f, v] : xs[i]) w[f] += lr * y * v;
          clf.bias_[c] += lr * y;
        }
      }
    }
  }
  return clf;
}

TypeClassifier::Scores TypeClassifier::scores(const std::vector<std::string>& tokens) const {
  Scores s = bias_;
  for (const auto& t : tokens) {
    auto it = index_.find(t);
    if (it == index_.end()) continue;
    for (std::size_t c = 0; c < sql::kSqlTypeCount; ++c) s[c] += weights_[c][it->second];
  }
  return s;
}

sql::SqlType TypeClassifier::predict(const std::vector<std::string>& tokens) const {
  Scores s = scores(tokens);
  std::size_t best = sql::kSqlTypeCount;
  for (std::size_t c = 0; c < sql::kSqlTypeCount; ++c) {
    if (!present_[c]) continue;
    if (best == sql::kSqlTypeCount || s[c] > s[best]) best = c;
  }
  if (best == sql::kSqlTypeCount) best = type_index(sql::SqlType::Select);
  return sql::kAllSqlTypes[best];
}

std::vector<sql::SqlType> TypeClassifier::missing_types() const {
  std::vector<sql::SqlType> out;
  for (std::size_t c = 0; c < sql::kSqlTypeCount; ++c) {
    if (!present_[c]) out.push_back(sql::kAllSqlTypes[c]);
  }
  return out;
}

json TypeClassifier::to_json() const {
  json w = json::array();
  for (const auto& v : weights_) w.push_back(v);
  return {{"format", "ptmaml-type-classifier"}, {"version", 1}, {"vocab", vocab_},
          {"weights", std::move(w)}, {"bias", bias_}, {"present", present_}};
}

TypeClassifier TypeClassifier::from_json(const json& j) {
  if (j.value("version", 0) != 1) throw std::runtime_error("unsupported type classifier version");
  TypeClassifier clf;
  clf.vocab_ = j.at("vocab").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < clf.vocab_.size(); ++i) clf.index_.emplace(clf.vocab_[i], i);
  const json& w = j.at("weights");
  for (std::size_t c = 0; c < sql::kSqlTypeCount; ++c) {
    clf.weights_[c] = w.at(c).get<std::vector<double>>();
    if (clf.weights_[c].size() != clf.vocab_.size()) throw std::runtime_error("type classifier weight size mismatch");
  }
  clf.bias_ = j.at("bias").get<Scores>();
  clf.present_ = j.at("present").get<std::array<bool, sql::kSqlTypeCount>>();
  return clf;
}

void TypeClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

TypeClassifier TypeClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return from_json(json::parse(in));
}

double type_accuracy(const TypeClassifier& clf, const data::Dataset& ds) {
  if (ds.examples.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& ex : ds.examples) hit += clf.predict(ex.tokens) == sql::sql_type_of(ex.gold);
  return static_cast<double>(hit) / static_cast<double>(ds.examples.size());
}

} // namespace ptmaml::relevance
