#include "ptmaml/relevance/retrieval.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "ptmaml/data/normalize.hpp"

namespace ptmaml::relevance {

using nlohmann::json;

std::optional<double> relevance_score(const TypeClassifier& clf, const data::Example& a, const data::Example& b) {
  if (clf.predict(a.tokens) != clf.predict(b.tokens)) return std::nullopt;
  return 1.0 - std::abs(data::question_length(a) - data::question_length(b));
}

SupportIndex::SupportIndex(const data::Dataset& pool, const TypeClassifier& clf, bool gold_types) {
  entries_.reserve(pool.examples.size());
  for (const auto& ex : pool.examples) {
    sql::SqlType t = gold_types ? sql::sql_type_of(ex.gold) : clf.predict(ex.tokens);
    entries_.push_back({ex.id, t, data::question_length(ex)});
  }
}

const SupportIndex::Entry& SupportIndex::entry(int id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  throw data::DataError("support index has no example " + std::to_string(id));
}

std::vector<int> SupportIndex::top_k(sql::SqlType type, int length, int k, std::optional<int> exclude) const {
  if (k <= 0) return {};
  struct Ranked {
    int gap;
    int id;
  };
  std::vector<Ranked> pool;
  for (const auto& e : entries_) {
    if (e.type != type || (exclude && e.id == *exclude)) continue;
    pool.push_back({std::abs(e.length - length), e.id});
  }
  // score = 1 - gap, so ranking by score then gap collapses to gap; id breaks ties.
  auto better = [](const Ranked& a, const Ranked& b) { return a.gap != b.gap ? a.gap < b.gap : a.id < b.id; };
  std::size_t take = std::min(pool.size(), static_cast<std::size_t>(k));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(), better);
  std::vector<int> ids;
  for (std::size_t i = 0; i < take; ++i) ids.push_back(pool[i].id);
  return ids;
}

std::vector<int> top_k_support(const data::Dataset& train, int query_id, int k, const TypeClassifier& clf) {
  SupportIndex index(train, clf);
  const auto& q = index.entry(query_id);
  return index.top_k(q.type, q.length, k, query_id);
}

std::vector<int> top_k_support_for(const data::Example& query, const data::Dataset& train, int k,
                                   const TypeClassifier& clf) {
  SupportIndex index(train, clf);
  return index.top_k(clf.predict(query.tokens), data::question_length(query), k);
}

TaskSet build_pseudo_tasks(const data::Dataset& train, int k, const TypeClassifier& clf, bool gold_types) {
  SupportIndex index(train, clf, gold_types);
  TaskSet set;
  set.tasks.reserve(train.examples.size());
  for (const auto& e : index.entries()) {
    set.tasks.push_back({index.top_k(e.type, e.length, k, e.id), e.id});
  }
  return set;
}

void write_tasks(const std::filesystem::path& path, const TaskSet& tasks) {
  std::ofstream out(path);
  if (!out) throw data::DataError("cannot write " + path.string());
  for (const auto& t : tasks.tasks) out << json{{"test_id", t.test_id}, {"support_ids", t.support_ids}}.dump() << '\n';
}

TaskSet read_tasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data::DataError("cannot open " + path.string());
  TaskSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      set.tasks.push_back({j.at("support_ids").get<std::vector<int>>(), j.at("test_id").get<int>()});
    } catch (const std::exception& e) {
      throw data::DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

} // namespace ptmaml::relevance
