#include "ptmaml/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "ptmaml/data/normalize.hpp"

namespace ptmaml::data {

namespace {

using sql::Comparator;
using sql::SqlType;

const std::vector<std::string> kTextColumns = {
    "Team",    "City",  "Player",    "Country", "School",   "Position", "Opponent", "Venue",
    "Game Site", "Home Team", "Club", "Nationality", "College", "Director", "Region", "Coach"};

const std::vector<std::string> kNumericColumns = {
    "Wins",  "Losses", "Points", "Year", "Rank", "Goals", "Attendance", "Pick",
    "Round", "Draws",  "Games Played", "Laps", "Grid", "Week", "Age", "Caps"};

const std::vector<std::string> kSyllables = {"ka",  "lo", "mi",  "ran", "te",  "su",  "vo",
                                             "der", "bel", "ha", "zi",  "no",  "pa",  "ri",
                                             "gu",  "sen", "mar", "tol", "vin", "qua"};

const std::map<Comparator, std::vector<std::string>> kConditionPhrases = {
    {Comparator::Eq, {"{col} is {val}", "{col} of {val}"}},
    {Comparator::Gt, {"{col} more than {val}", "{col} greater than {val}"}},
    {Comparator::Lt, {"{col} less than {val}", "{col} fewer than {val}"}},
    {Comparator::Ge, {"{col} at least {val}"}},
    {Comparator::Le, {"{col} at most {val}"}},
};

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class Generator {
public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { make_entities(); }

  SynthCorpus run() {
    SynthCorpus corpus;
    int total = cfg_.n_train + cfg_.n_dev + cfg_.n_test;
    auto share = [&](int n) { return std::max(1, static_cast<int>(std::lround(double(cfg_.n_tables) * n / total))); };
    auto train_tables = make_tables(share(cfg_.n_train), 1);
    auto dev_tables = make_tables(share(cfg_.n_dev), 2);
    auto test_tables = make_tables(share(cfg_.n_test), 3);

    corpus.raw_train = make_examples(train_tables, cfg_.n_train);
    corpus.raw_dev = make_examples(dev_tables, cfg_.n_dev);
    corpus.raw_test = make_examples(test_tables, cfg_.n_test);

    for (auto* group : {&train_tables, &dev_tables, &test_tables}) {
      corpus.tables.insert(corpus.tables.end(), group->begin(), group->end());
    }
    corpus.train = to_dataset(corpus.raw_train, train_tables, Split::Train);
    corpus.dev = to_dataset(corpus.raw_dev, dev_tables, Split::Dev);
    corpus.test = to_dataset(corpus.raw_test, test_tables, Split::Test);
    return corpus;
  }

private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  std::string make_word() {
    std::string w;
    int n = uniform(2, 3);
    for (int i = 0; i < n; ++i) w += pick(kSyllables);
    return w;
  }

  void make_entities() {
    std::set<std::string> seen;
    int guard = 0;
    while (static_cast<int>(entities_.size()) < cfg_.entity_vocab && guard++ < cfg_.entity_vocab * 100) {
      std::string e = capitalize(make_word());
      if (uniform(0, 9) < 3) e += " " + capitalize(make_word());
      if (seen.insert(lower(e)).second) entities_.push_back(e);
    }
  }

  std::vector<sql::Table> make_tables(int n, int prefix) {
    std::vector<sql::Table> tables;
    for (int k = 0; k < n; ++k) {
      sql::Table t;
      t.id = std::to_string(prefix) + "-" + std::to_string(uniform(100000, 999999)) + "-" + std::to_string(k);
      int n_text = uniform(2, 3);
      int n_num = uniform(2, 3);
      auto text = kTextColumns;
      auto num = kNumericColumns;
      std::shuffle(text.begin(), text.end(), rng_);
      std::shuffle(num.begin(), num.end(), rng_);
      std::vector<std::pair<std::string, bool>> cols;
      for (int i = 0; i < n_text; ++i) cols.emplace_back(text[static_cast<std::size_t>(i)], false);
      for (int i = 0; i < n_num; ++i) cols.emplace_back(num[static_cast<std::size_t>(i)], true);
      std::shuffle(cols.begin(), cols.end(), rng_);
      std::vector<bool> numeric;
      for (auto& [name, is_num] : cols) {
        t.header.push_back(name);
        numeric.push_back(is_num);
      }
      for (int r = 0; r < cfg_.rows_per_table; ++r) {
        std::vector<std::string> row;
        for (bool is_num : numeric) {
          row.push_back(is_num ? std::to_string(uniform(1, cfg_.max_number)) : pick(entities_));
        }
        t.rows.push_back(std::move(row));
      }
      numeric_[t.id] = numeric;
      tables.push_back(std::move(t));
    }
    return tables;
  }

  RawExample make_example(const sql::Table& t) {
    const auto& numeric = numeric_.at(t.id);
    std::vector<int> num_cols, all_cols;
    for (int i = 0; i < static_cast<int>(t.header.size()); ++i) {
      all_cols.push_back(i);
      if (numeric[static_cast<std::size_t>(i)]) num_cols.push_back(i);
    }

    SqlType type = sql::kAllSqlTypes[static_cast<std::size_t>(uniform(0, 5))];
    bool numeric_agg = type == SqlType::Min || type == SqlType::Max || type == SqlType::Sum || type == SqlType::Avg;
    int sel = numeric_agg ? pick(num_cols) : pick(all_cols);

    std::vector<int> cond_pool;
    for (int c : all_cols) {
      if (c != sel) cond_pool.push_back(c);
    }
    std::shuffle(cond_pool.begin(), cond_pool.end(), rng_);
    int roll = uniform(0, 99);
    int n_conds = roll < 50 ? 1 : roll < 85 ? 2 : 3;
    n_conds = std::min({n_conds, cfg_.max_conditions, static_cast<int>(cond_pool.size())});

    const auto& anchor = t.rows[static_cast<std::size_t>(uniform(0, static_cast<int>(t.rows.size()) - 1))];
    RawExample ex;
    ex.table_id = t.id;
    ex.sql.sel = sel;
    ex.sql.agg = aggregator_code(type);
    std::vector<std::string> phrases;
    for (int k = 0; k < n_conds; ++k) {
      int col = cond_pool[static_cast<std::size_t>(k)];
      Comparator op = Comparator::Eq;
      std::string value = anchor[static_cast<std::size_t>(col)];
      if (numeric[static_cast<std::size_t>(col)]) {
        int r = uniform(0, 9);
        op = r < 4 ? Comparator::Eq : r < 6 ? Comparator::Gt : r < 8 ? Comparator::Lt : r < 9 ? Comparator::Ge : Comparator::Le;
        if (op != Comparator::Eq) {
          value = t.rows[static_cast<std::size_t>(uniform(0, static_cast<int>(t.rows.size()) - 1))]
                        [static_cast<std::size_t>(col)];
        }
      }
      ex.sql.conds.push_back({col, comparator_code(op), value});
      std::string phrase = pick(kConditionPhrases.at(op));
      phrase = replace_all(phrase, "{col}", lower(t.header[static_cast<std::size_t>(col)]));
      phrase = replace_all(phrase, "{val}", value);
      phrases.push_back(std::move(phrase));
    }
    std::string conds;
    for (std::size_t i = 0; i < phrases.size(); ++i) conds += (i ? " and " : "") + phrases[i];

    std::string q = pick(cfg_.templates.at(type));
    q = replace_all(q, "{sel}", lower(t.header[static_cast<std::size_t>(sel)]));
    q = replace_all(q, "{conds}", conds);
    ex.question = capitalize(q);
    return ex;
  }

  std::vector<RawExample> make_examples(const std::vector<sql::Table>& tables, int n) {
    std::vector<RawExample> out;
    for (int i = 0; i < n; ++i) out.push_back(make_example(pick(tables)));
    return out;
  }

  Dataset to_dataset(const std::vector<RawExample>& raw, const std::vector<sql::Table>& tables, Split split) {
    Dataset ds;
    ds.split = split;
    std::map<std::string, const sql::Table*> by_id;
    for (const auto& t : tables) by_id[t.id] = &t;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const sql::Table& t = *by_id.at(raw[i].table_id);
      ds.examples.push_back(normalize_example(raw[i], t, static_cast<int>(i)));
      if (!ds.tables.contains(t.id)) ds.tables.emplace(t.id, normalize_table(t));
    }
    return ds;
  }

  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<std::string> entities_;
  std::map<std::string, std::vector<bool>> numeric_;
};

} // namespace

std::map<SqlType, std::vector<std::string>> SynthConfig::default_templates() {
  return {
      {SqlType::Select,
       {"what is the {sel} when {conds} ?", "name the {sel} for {conds}", "which {sel} has {conds} ?",
        "tell me the {sel} with {conds}"}},
      {SqlType::Count,
       {"how many {sel} are there when {conds} ?", "how many {sel} have {conds} ?", "count the {sel} with {conds}"}},
      {SqlType::Min,
       {"what is the lowest {sel} when {conds} ?", "name the smallest {sel} for {conds}",
        "which is the minimum {sel} with {conds} ?"}},
      {SqlType::Max,
       {"what is the highest {sel} when {conds} ?", "name the largest {sel} for {conds}",
        "which is the maximum {sel} with {conds} ?"}},
      {SqlType::Sum,
       {"what is the total {sel} when {conds} ?", "name the sum of {sel} for {conds}",
        "how much {sel} in total with {conds} ?"}},
      {SqlType::Avg,
       {"what is the average {sel} when {conds} ?", "name the mean {sel} for {conds}",
        "which is the average {sel} with {conds} ?"}},
  };
}

void SynthConfig::validate() const {
  if (n_tables <= 0 || rows_per_table <= 0 || n_train <= 0 || n_dev <= 0 || n_test <= 0 || entity_vocab <= 0 ||
      max_number <= 0 || max_conditions <= 0) {
    throw std::invalid_argument("synthetic config counts must be positive");
  }
  for (SqlType t : sql::kAllSqlTypes) {
    auto it = templates.find(t);
    if (it == templates.end() || it->second.empty()) {
      throw std::invalid_argument("no question template for type " + std::string(sql::type_name(t)));
    }
  }
}

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  return Generator(cfg).run();
}

} // namespace ptmaml::data
