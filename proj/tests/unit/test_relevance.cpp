#include <doctest.h>

#include <algorithm>
#include <random>

#include "ptmaml/data/synthetic.hpp"
#include "ptmaml/relevance/classifier.hpp"
#include "ptmaml/relevance/retrieval.hpp"
#include "retrieval_oracle.hpp"
#include "temp_dir.hpp"

using namespace ptmaml;
using namespace ptmaml::relevance;

namespace {

const data::SynthCorpus& corpus() {
  static const data::SynthCorpus c = [] {
    data::SynthConfig cfg;
    cfg.n_tables = 16;
    cfg.n_train = 240;
    cfg.n_dev = 40;
    cfg.n_test = 40;
    cfg.seed = 9;
    return data::generate_synthetic(cfg);
  }();
  return c;
}

const TypeClassifier& classifier() {
  static const TypeClassifier clf = TypeClassifier::train(corpus().train, ClassifierConfig{});
  return clf;
}

data::Example with_tokens(int id, std::vector<std::string> tokens) {
  data::Example ex;
  ex.id = id;
  ex.tokens = std::move(tokens);
  return ex;
}


} // namespace

TEST_CASE("classifier separates the synthetic templates") {
  CHECK(type_accuracy(classifier(), corpus().train) >= 0.99);
  CHECK(type_accuracy(classifier(), corpus().dev) >= 0.95);
  CHECK(classifier().missing_types().empty());
  CHECK(classifier().predict({"how", "many", "wins", "are", "there"}) == sql::SqlType::Count);
  CHECK(classifier().predict({"what", "is", "the", "average", "score"}) == sql::SqlType::Avg);
}

TEST_CASE("classifier: training is deterministic") {
  auto a = TypeClassifier::train(corpus().train, ClassifierConfig{});
  auto b = TypeClassifier::train(corpus().train, ClassifierConfig{});
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("classifier: OOV input falls back to the largest bias") {
  const auto& clf = classifier();
  auto bias = clf.scores({});
  CHECK(clf.scores({"qqqq", "zzzz"}) == bias);
  std::size_t best = 0;
  for (std::size_t i = 1; i < bias.size(); ++i) {
    if (bias[i] > bias[best]) best = i;
  }
  CHECK(type_index(clf.predict({"qqqq"})) == best);
}

TEST_CASE("classifier: bag of words counts duplicates and ignores order") {
  const auto& clf = classifier();
  auto once = clf.scores({"how", "many", "wins"});
  auto twice = clf.scores({"how", "how", "many", "wins"});
  auto extra = clf.scores({"how"});
  auto none = clf.scores({});
  for (std::size_t c = 0; c < once.size(); ++c) {
    CHECK(twice[c] == doctest::Approx(once[c] + (extra[c] - none[c])).epsilon(1e-12));
  }
  CHECK(once != twice);

  std::mt19937_64 rng(2);
  for (const auto& ex : corpus().dev.examples) {
    auto shuffled = ex.tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(clf.predict(shuffled) == clf.predict(ex.tokens));
  }
}

TEST_CASE("classifier: single-class corpus predicts that class") {
  data::Dataset only = corpus().train;
  std::erase_if(only.examples, [](const data::Example& e) { return e.gold.agg != sql::SqlType::Max; });
  REQUIRE_FALSE(only.examples.empty());
  auto clf = TypeClassifier::train(only, ClassifierConfig{});
  CHECK(clf.missing_types().size() == 5);
  for (const auto& ex : corpus().dev.examples) CHECK(clf.predict(ex.tokens) == sql::SqlType::Max);
  CHECK(clf.predict({}) == sql::SqlType::Max);
}

TEST_CASE("classifier: json round trip") {
  ptmaml::testing::TempDir dir("rel");
  classifier().save(dir / "clf.json");
  auto back = TypeClassifier::load(dir / "clf.json");
  CHECK(back.to_json() == classifier().to_json());
  for (const auto& ex : corpus().dev.examples) CHECK(back.scores(ex.tokens) == classifier().scores(ex.tokens));
}

TEST_CASE("relevance score examples") {
  const auto& clf = classifier();
  auto count8 = with_tokens(1, {"how", "many", "a", "b", "c", "d", "e", "f"});
  auto count10 = with_tokens(2, {"how", "many", "a", "b", "c", "d", "e", "f", "g", "h"});
  auto avg = with_tokens(3, {"what", "is", "the", "average", "score", "x", "y", "z"});
  REQUIRE(clf.predict(count8.tokens) == sql::SqlType::Count);
  REQUIRE(clf.predict(count10.tokens) == sql::SqlType::Count);
  REQUIRE(clf.predict(avg.tokens) == sql::SqlType::Avg);
  CHECK(relevance_score(clf, count8, count10) == -1.0);
  CHECK(relevance_score(clf, count8, count8) == 1.0);
  CHECK_FALSE(relevance_score(clf, count8, avg).has_value());
}

TEST_CASE("relevance score is symmetric and at most one") {
  const auto& ex = corpus().train.examples;
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t j = 0; j < 60; ++j) {
      auto ab = relevance_score(classifier(), ex[i], ex[j]);
      auto ba = relevance_score(classifier(), ex[j], ex[i]);
      REQUIRE(ab.has_value() == ba.has_value());
      if (!ab) continue;
      CHECK(*ab == *ba);
      CHECK(*ab <= 1.0);
      bool same = classifier().predict(ex[i].tokens) == classifier().predict(ex[j].tokens) &&
                  ex[i].tokens.size() == ex[j].tokens.size();
      CHECK((*ab == 1.0) == same);
    }
  }
}

TEST_CASE("top_k_support matches brute force ranking") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> words = {"how", "many", "average", "lowest", "highest", "total", "what", "the", "x"};
  for (int trial = 0; trial < 100; ++trial) {
    auto pool = ptmaml::testing::random_pool(rng, 50, words);
    const auto& q = pool.examples[static_cast<std::size_t>(trial % 50)];
    int k = 1 + trial % 4;
    CHECK(top_k_support(pool, q.id, k, classifier()) ==
          ptmaml::testing::brute_force_top_k(q, pool, k, classifier(), true));
    auto outside = with_tokens(-5, q.tokens);
    CHECK(top_k_support_for(outside, pool, k, classifier()) ==
          ptmaml::testing::brute_force_top_k(outside, pool, k, classifier(), false));
  }
}

TEST_CASE("top_k_support truncation and dominance") {
  const auto& clf = classifier();
  data::Dataset pool;
  pool.examples = {with_tokens(0, {"how", "many", "a"}), with_tokens(1, {"how", "many", "a", "b"}),
                   with_tokens(2, {"what", "is", "the", "average", "x"})};
  CHECK(top_k_support(pool, 0, 5, clf) == std::vector<int>{1});
  CHECK(top_k_support(pool, 2, 2, clf).empty());

  pool.examples.push_back(with_tokens(7, {"how", "many", "q"}));
  auto got = top_k_support(pool, 0, 2, clf);
  CHECK(got == std::vector<int>{7, 1});
}

TEST_CASE("pseudo tasks") {
  const auto& train = corpus().train;
  auto tasks = build_pseudo_tasks(train, 2, classifier());
  REQUIRE(tasks.tasks.size() == train.examples.size());
  for (std::size_t i = 0; i < tasks.tasks.size(); ++i) {
    const auto& t = tasks.tasks[i];
    CHECK(t.test_id == train.examples[i].id);
    CHECK(t.support_ids.size() <= 2);
    CHECK(std::find(t.support_ids.begin(), t.support_ids.end(), t.test_id) == t.support_ids.end());
    CHECK(t.support_ids == top_k_support(train, t.test_id, 2, classifier()));
  }
  CHECK(build_pseudo_tasks(train, 2, classifier()) == tasks);

  ptmaml::testing::TempDir dir("rel");
  write_tasks(dir / "tasks.jsonl", tasks);
  CHECK(read_tasks(dir / "tasks.jsonl") == tasks);

  auto gold = build_pseudo_tasks(train, 3, classifier(), true);
  for (const auto& t : gold.tasks) {
    auto type = train.examples[train.index_of(t.test_id)].gold.agg;
    for (int s : t.support_ids) CHECK(train.examples[train.index_of(s)].gold.agg == type);
  }
}
