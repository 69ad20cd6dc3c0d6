#include "ptmaml/data/normalize.hpp"

#include <algorithm>
#include <unordered_map>

#include "ptmaml/sql/text.hpp"

namespace ptmaml::data {

sql::Table normalize_table(const sql::Table& raw) {
  sql::Table t = raw;
  for (auto& h : t.header) h = sql::normalize_header(h);
  t.validate();
  return t;
}

std::vector<std::string> collapse_entities(const std::vector<std::string>& tokens, const sql::Table& table) {
  // first token -> candidate cell token sequences
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first;
  std::size_t longest = 0;
  for (const auto& row : table.rows) {
    for (const auto& cell : row) {
      auto toks = sql::tokenize(cell);
      if (toks.size() < 2) continue;
      longest = std::max(longest, toks.size());
      auto& bucket = by_first[toks.front()];
      if (std::find(bucket.begin(), bucket.end(), toks) == bucket.end()) bucket.push_back(std::move(toks));
    }
  }

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t best = 1;
    auto it = by_first.find(tokens[i]);
    if (it != by_first.end()) {
      for (const auto& cand : it->second) {
        if (cand.size() <= best || i + cand.size() > tokens.size()) continue;
        if (std::equal(cand.begin(), cand.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) best = cand.size();
      }
    }
    if (best == 1) {
      out.push_back(tokens[i]);
    } else {
      std::vector<std::string> phrase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + best));
      out.push_back(sql::join(phrase, std::string_view(&sql::kEntityJoiner, 1)));
    }
    i += best;
  }
  return out;
}

namespace {

sql::SqlQuery normalize_query(const sql::SqlQuery& q) {
  sql::SqlQuery out = q;
  out.select_col = sql::normalize_header(q.select_col);
  for (auto& c : out.conds) {
    c.column = sql::normalize_header(c.column);
    c.value = sql::normalize_value(c.value);
  }
  return out;
}

} // namespace

Example normalize_example(const RawExample& raw, const sql::Table& table, int id) {
  sql::Table norm = normalize_table(table);
  Example ex;
  ex.id = id;
  ex.table_id = table.id;
  ex.header = norm.header;
  ex.tokens = collapse_entities(sql::tokenize(raw.question), norm);
  ex.gold = normalize_query(decode_raw_sql(raw.sql, norm));
  return ex;
}

Example renormalize(const Example& ex, const sql::Table& table) {
  sql::Table norm = normalize_table(table);
  Example out = ex;
  out.header = norm.header;
  out.tokens = collapse_entities(sql::tokenize(sql::join(ex.tokens, " ")), norm);
  out.gold = normalize_query(ex.gold);
  return out;
}

bool constants_copyable(const Example& ex) {
  return std::all_of(ex.gold.conds.begin(), ex.gold.conds.end(), [&](const sql::Condition& c) {
    return std::find(ex.tokens.begin(), ex.tokens.end(), c.value) != ex.tokens.end();
  });
}

Dataset filter_copyable(const Dataset& ds) {
  if (ds.evaluation_only()) return ds;
  Dataset out;
  out.split = ds.split;
  out.tables = ds.tables;
  for (const auto& ex : ds.examples) {
    if (constants_copyable(ex)) out.examples.push_back(ex);
  }
  return out;
}

} // namespace ptmaml::data
