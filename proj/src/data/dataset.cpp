#include "ptmaml/data/dataset.hpp"

#include <fstream>
#include <set>

#include "ptmaml/data/normalize.hpp"
#include "ptmaml/sql/parser.hpp"

namespace ptmaml::data {

using nlohmann::json;

namespace {

constexpr sql::SqlType kAggregatorCodes[] = {sql::SqlType::Select, sql::SqlType::Max, sql::SqlType::Min,
                                             sql::SqlType::Count,  sql::SqlType::Sum, sql::SqlType::Avg};
constexpr sql::Comparator kComparatorCodes[] = {sql::Comparator::Eq, sql::Comparator::Gt, sql::Comparator::Lt,
                                                sql::Comparator::Ge, sql::Comparator::Le};

template <class F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line), line_no);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void fnv(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= 0xff;
  h *= 1099511628211ull;
}

} // namespace

sql::SqlType aggregator_from_code(int code) {
  if (code < 0 || code >= 6) throw std::out_of_range("aggregator index " + std::to_string(code) + " out of range");
  return kAggregatorCodes[code];
}

int aggregator_code(sql::SqlType t) {
  for (int i = 0; i < 6; ++i) {
    if (kAggregatorCodes[i] == t) return i;
  }
  return 0;
}

sql::Comparator comparator_from_code(int code) {
  if (code < 0 || code >= 5) throw std::out_of_range("comparator index " + std::to_string(code) + " out of range");
  return kComparatorCodes[code];
}

int comparator_code(sql::Comparator c) {
  for (int i = 0; i < 5; ++i) {
    if (kComparatorCodes[i] == c) return i;
  }
  return 0;
}

sql::SqlQuery decode_raw_sql(const RawSql& raw, const sql::Table& table) {
  auto column = [&](int idx, const char* what) -> const std::string& {
    if (idx < 0 || static_cast<std::size_t>(idx) >= table.header.size()) {
      throw std::out_of_range(std::string(what) + " column index " + std::to_string(idx) + " outside header of " +
                              std::to_string(table.header.size()) + " columns");
    }
    return table.header[static_cast<std::size_t>(idx)];
  };
  sql::SqlQuery q;
  q.agg = aggregator_from_code(raw.agg);
  q.select_col = column(raw.sel, "select");
  q.table = table.id;
  for (const auto& c : raw.conds) {
    q.conds.push_back({column(c.column, "condition"), comparator_from_code(c.op), c.value});
  }
  return q;
}

RawSql encode_raw_sql(const sql::SqlQuery& q, const sql::Table& table) {
  auto index = [&](const std::string& name) {
    auto i = table.column_index(name);
    if (!i) throw std::out_of_range("column '" + name + "' not in table " + table.id);
    return static_cast<int>(*i);
  };
  RawSql raw{index(q.select_col), aggregator_code(q.agg), {}};
  for (const auto& c : q.conds) raw.conds.push_back({index(c.column), comparator_code(c.op), c.value});
  return raw;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

const sql::Table& Dataset::table(const std::string& id) const {
  auto it = tables.find(id);
  if (it == tables.end()) throw DataError("unknown table id '" + id + "'");
  return it->second;
}

std::size_t Dataset::index_of(int id) const {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].id == id) return i;
  }
  throw DataError("no example with id " + std::to_string(id));
}

void Dataset::validate() const {
  std::set<int> ids;
  for (const auto& ex : examples) {
    if (!ids.insert(ex.id).second) throw std::invalid_argument("duplicate example id " + std::to_string(ex.id));
    if (!tables.contains(ex.table_id)) {
      throw std::invalid_argument("example " + std::to_string(ex.id) + " refers to unknown table " + ex.table_id);
    }
  }
}

std::uint64_t dataset_fingerprint(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ull;
  fnv(h, split_name(ds.split));
  for (const auto& ex : ds.examples) {
    fnv(h, std::to_string(ex.id));
    for (const auto& t : ex.tokens) fnv(h, t);
    fnv(h, sql::canonicalize(ex.gold));
  }
  for (const auto& [id, t] : ds.tables) fnv(h, table_to_json(t).dump());
  return h;
}

json raw_example_to_json(const RawExample& ex) {
  json conds = json::array();
  for (const auto& c : ex.sql.conds) conds.push_back(json::array({c.column, c.op, c.value}));
  return {{"question", ex.question},
          {"table_id", ex.table_id},
          {"sql", {{"sel", ex.sql.sel}, {"agg", ex.sql.agg}, {"conds", std::move(conds)}}}};
}

RawExample raw_example_from_json(const json& j) {
  RawExample ex;
  ex.question = j.at("question").get<std::string>();
  ex.table_id = j.at("table_id").get<std::string>();
  const json& s = j.at("sql");
  ex.sql.sel = s.at("sel").get<int>();
  ex.sql.agg = s.at("agg").get<int>();
  for (const auto& c : s.at("conds")) {
    if (!c.is_array() || c.size() != 3) throw std::invalid_argument("condition must be [column, op, value]");
    std::string value = c[2].is_string() ? c[2].get<std::string>() : c[2].dump();
    ex.sql.conds.push_back({c[0].get<int>(), c[1].get<int>(), std::move(value)});
  }
  return ex;
}

std::vector<RawExample> read_raw_examples(const std::filesystem::path& path) {
  std::vector<RawExample> out;
  for_each_line(path, [&](const json& j, std::size_t) { out.push_back(raw_example_from_json(j)); });
  return out;
}

void write_raw_examples(const std::filesystem::path& path, const std::vector<RawExample>& examples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& ex : examples) out << raw_example_to_json(ex).dump() << '\n';
}

Dataset load_dataset(const std::filesystem::path& examples_path, const std::filesystem::path& tables_path,
                     Split split) {
  Dataset ds;
  ds.split = split;
  std::map<std::string, sql::Table> raw_tables;
  for (auto& t : sql::read_tables(tables_path)) raw_tables.emplace(t.id, std::move(t));

  int next_id = 0;
  for_each_line(examples_path, [&](const json& j, std::size_t line_no) {
    RawExample raw = raw_example_from_json(j);
    auto it = raw_tables.find(raw.table_id);
    if (it == raw_tables.end()) {
      throw DataError(examples_path.string() + ":" + std::to_string(line_no) + ": unknown table id '" +
                      raw.table_id + "'");
    }
    Example ex = normalize_example(raw, it->second, next_id++);
    if (!ds.tables.contains(raw.table_id)) ds.tables.emplace(raw.table_id, normalize_table(it->second));
    ds.examples.push_back(std::move(ex));
  });
  return ds;
}

void write_prepared(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& ex : ds.examples) {
    json j = {{"id", ex.id}, {"table_id", ex.table_id}, {"tokens", ex.tokens}, {"sql", sql::canonicalize(ex.gold)}};
    out << j.dump() << '\n';
  }
}

Dataset read_prepared(const std::filesystem::path& path, const std::map<std::string, sql::Table>& tables,
                      Split split) {
  Dataset ds;
  ds.split = split;
  for_each_line(path, [&](const json& j, std::size_t line_no) {
    Example ex;
    ex.id = j.at("id").get<int>();
    ex.table_id = j.at("table_id").get<std::string>();
    ex.tokens = j.at("tokens").get<std::vector<std::string>>();
    auto it = tables.find(ex.table_id);
    if (it == tables.end()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown table id '" + ex.table_id + "'");
    }
    ex.header = it->second.header;
    ex.gold = sql::parse_sql(j.at("sql").get<std::string>(), it->second);
    if (!ds.tables.contains(ex.table_id)) ds.tables.emplace(ex.table_id, it->second);
    ds.examples.push_back(std::move(ex));
  });
  ds.validate();
  return ds;
}

} // namespace ptmaml::data
