#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ptmaml/sql/query.hpp"
#include "ptmaml/sql/table.hpp"

namespace ptmaml::data {

/// Benchmark index encoding of a gold query. Aggregator codes:
///   0 none (plain select), 1 MAX, 2 MIN, 3 COUNT, 4 SUM, 5 AVG
/// Comparator codes:
///   0 '=', 1 '>', 2 '<', 3 '>=', 4 '<='
struct RawCondition {
  int column = 0;
  int op = 0;
  std::string value;
  friend bool operator==(const RawCondition&, const RawCondition&) = default;
};

struct RawSql {
  int sel = 0;
  int agg = 0;
  std::vector<RawCondition> conds;
  friend bool operator==(const RawSql&, const RawSql&) = default;
};

struct RawExample {
  std::string question;
  std::string table_id;
  RawSql sql;
  friend bool operator==(const RawExample&, const RawExample&) = default;
};

sql::SqlType aggregator_from_code(int code);
int aggregator_code(sql::SqlType t);
sql::Comparator comparator_from_code(int code);
int comparator_code(sql::Comparator c);

/// Decodes indices against the table's raw header. Throws
/// std::out_of_range naming the offending index.
sql::SqlQuery decode_raw_sql(const RawSql& raw, const sql::Table& table);
RawSql encode_raw_sql(const sql::SqlQuery& q, const sql::Table& table);

struct Example {
  int id = 0;
  std::vector<std::string> tokens;  // normalized, entities collapsed
  std::vector<std::string> header;  // normalized column names
  std::string table_id;
  sql::SqlQuery gold;
  friend bool operator==(const Example&, const Example&) = default;
};

enum class Split { Train, Dev, Test };
std::string_view split_name(Split s);

struct Dataset {
  Split split = Split::Train;
  std::vector<Example> examples;
  std::map<std::string, sql::Table> tables;  // normalized headers

  /// Dev and test are evaluated in full and never filtered.
  bool evaluation_only() const { return split != Split::Train; }
  const sql::Table& table(const std::string& id) const;
  /// Position of the example with this id. Throws if absent.
  std::size_t index_of(int id) const;
  /// Throws std::invalid_argument on dangling table ids or duplicate ids.
  void validate() const;
};

/// Stable hash of examples and their tables; used to refuse comparisons of
/// runs made on different corpora.
std::uint64_t dataset_fingerprint(const Dataset& ds);

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json raw_example_to_json(const RawExample& ex);
RawExample raw_example_from_json(const nlohmann::json& j);

/// Raw JSON-lines: {"question", "table_id", "sql": {"sel", "agg", "conds"}}.
std::vector<RawExample> read_raw_examples(const std::filesystem::path& path);
void write_raw_examples(const std::filesystem::path& path, const std::vector<RawExample>& examples);

/// Reads raw examples and tables, decodes indices and normalizes every
/// example. Dangling table ids, out-of-range indices and malformed JSON are
/// reported with the 1-based line number.
Dataset load_dataset(const std::filesystem::path& examples_path, const std::filesystem::path& tables_path,
                     Split split = Split::Train);

/// Prepared JSON-lines: {"id", "table_id", "tokens", "sql": canonical text}.
/// Tables are written separately with their normalized headers.
void write_prepared(const std::filesystem::path& path, const Dataset& ds);
Dataset read_prepared(const std::filesystem::path& path, const std::map<std::string, sql::Table>& tables,
                      Split split);

} // namespace ptmaml::data
