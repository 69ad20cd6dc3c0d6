#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "exec_oracle.hpp"
#include "ptmaml/sql/executor.hpp"
#include "ptmaml/sql/grammar.hpp"
#include "ptmaml/sql/parser.hpp"
#include "ptmaml/sql/query.hpp"
#include "ptmaml/sql/text.hpp"

using namespace ptmaml::sql;

namespace {

Table losses_table() {
  return Table{"2-17982145-1", {"benalla dfl", "wins", "losses", "draws"}, {}};
}

Table score_table() {
  return Table{"t", {"name", "score"}, {{"a", "1"}, {"b", "2"}}};
}

SqlQuery query(SqlType agg, std::string col, std::vector<Condition> conds = {}, std::string table = "t") {
  return SqlQuery{agg, std::move(col), std::move(table), std::move(conds)};
}

std::set<Terminal> terminals(const AllowedNext& a) { return {a.terminals.begin(), a.terminals.end()}; }

// Random query over a random header; values are normalized tokens.
struct Fuzzed {
  Table table;
  SqlQuery q;
};

Fuzzed fuzz_query(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const std::vector<std::string> words = {"wins", "losses", "team", "score", "and", "where", "from",
                                                 "select", "count", "min", "home", "away", "date", "id"};
  Fuzzed f;
  f.table.id = std::to_string(pick(1, 2)) + "-" + std::to_string(pick(1000, 99999)) + "-" + std::to_string(pick(1, 9));
  std::set<std::string> seen;
  int ncol = pick(1, 6);
  while (static_cast<int>(f.table.header.size()) < ncol) {
    std::string name = words[static_cast<std::size_t>(pick(0, 13))];
    if (pick(0, 2) == 0) name += " " + words[static_cast<std::size_t>(pick(0, 13))];
    if (seen.insert(name).second) f.table.header.push_back(name);
  }
  auto col = [&] { return f.table.header[static_cast<std::size_t>(pick(0, ncol - 1))]; };
  f.q.table = f.table.id;
  f.q.agg = kAllSqlTypes[static_cast<std::size_t>(pick(0, 5))];
  f.q.select_col = col();
  int nc = pick(0, 4);
  for (int i = 0; i < nc; ++i) {
    std::string value;
    switch (pick(0, 3)) {
      case 0: value = std::to_string(pick(0, 500)); break;
      case 1: value = words[static_cast<std::size_t>(pick(0, 13))]; break;
      case 2: value = "new^york"; break;
      default: value = std::to_string(pick(0, 50)) + "." + std::to_string(pick(0, 9)); break;
    }
    f.q.conds.push_back({col(), kAllComparators[static_cast<std::size_t>(pick(0, 4))], value});
  }
  return f;
}

} // namespace

TEST_CASE("parse: min with two conditions over a multiword column") {
  auto q = parse_sql("SELECT MIN(losses) FROM 2-17982145-1 WHERE benalla dfl = goorambat AND wins < 13", losses_table());
  CHECK(q.agg == SqlType::Min);
  CHECK(q.select_col == "losses");
  CHECK(q.table == "2-17982145-1");
  REQUIRE(q.conds.size() == 2);
  CHECK(q.conds[0] == Condition{"benalla dfl", Comparator::Eq, "goorambat"});
  CHECK(q.conds[1] == Condition{"wins", Comparator::Lt, "13"});
}

TEST_CASE("parse: plain select with one condition") {
  Table t{"1-26223231-1", {"poles", "wins", "series"}, {}};
  auto q = parse_sql("SELECT poles FROM 1-26223231-1 WHERE wins = 2", t);
  CHECK(q.agg == SqlType::Select);
  CHECK(q.select_col == "poles");
  REQUIRE(q.conds.size() == 1);
  CHECK(q.conds[0] == Condition{"wins", Comparator::Eq, "2"});
}

TEST_CASE("parse: no WHERE clause") {
  Table t{"t", {"col1"}, {}};
  auto q = parse_sql("SELECT col1 FROM t", t);
  CHECK(q.agg == SqlType::Select);
  CHECK(q.conds.empty());
}

TEST_CASE("parse: keywords are case-insensitive") {
  auto q = parse_sql("select count(wins) from 2-17982145-1 where losses >= 3", losses_table());
  CHECK(q.agg == SqlType::Count);
  REQUIRE(q.conds.size() == 1);
  CHECK(q.conds[0].op == Comparator::Ge);
}

TEST_CASE("parse: errors") {
  Table t{"t", {"a", "b"}, {}};
  CHECK_THROWS_AS(parse_sql("SELECT a t", t), ParseError);
  CHECK_THROWS_AS(parse_sql("SELECT a FROM t WHERE b", t), ParseError);
  CHECK_THROWS_AS(parse_sql("SELECT a FROM t WHERE b ~ 3", t), ParseError);
  try {
    parse_sql("SELECT zzz FROM t", t);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }
  try {
    parse_sql("SELECT a FROM t WHERE", t);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.position() > 0);
  }
}

TEST_CASE("canonicalize round-trips the min query") {
  const std::string text = "SELECT MIN(losses) FROM 2-17982145-1 WHERE benalla dfl = goorambat AND wins < 13";
  auto q = parse_sql(text, losses_table());
  CHECK(canonicalize(q) == text);
  CHECK(parse_sql(canonicalize(q), losses_table()) == q);
}

TEST_CASE("canonicalize drops WHERE without conditions") {
  auto text = canonicalize(query(SqlType::Max, "score"));
  CHECK(text == "SELECT MAX(score) FROM t");
  CHECK(text.find("WHERE") == std::string::npos);
}

TEST_CASE("parse after canonicalize is the identity on 500 fuzzed queries") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    auto f = fuzz_query(rng);
    auto text = canonicalize(f.q);
    INFO(text);
    CHECK(parse_sql(text, f.table) == f.q);
  }
}

TEST_CASE("type and normalized length") {
  CHECK(normalized_sql_length(query(SqlType::Select, "c")) == 4);
  CHECK(normalized_sql_length(query(SqlType::Select, "c", {{"c1", Comparator::Eq, "v"}})) == 8);
  CHECK(normalized_sql_length(query(SqlType::Count, "c")) == 5);
  CHECK(normalized_sql_length(query(SqlType::Select, "long name", {{"c1", Comparator::Eq, "new^york"}})) == 8);
  CHECK(sql_type_of(query(SqlType::Count, "c")) == SqlType::Count);
  CHECK(kAllSqlTypes.size() == 6);
}

TEST_CASE("validate_query rejects unknown columns and table ids") {
  auto t = score_table();
  CHECK_NOTHROW(validate_query(query(SqlType::Select, "name"), t));
  CHECK_THROWS_AS(validate_query(query(SqlType::Select, "nope"), t), std::invalid_argument);
  CHECK_THROWS_AS(validate_query(query(SqlType::Select, "name", {{"x", Comparator::Eq, "1"}}), t),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_query(query(SqlType::Select, "name", {}, "other"), t), std::invalid_argument);
}

TEST_CASE("text normalization") {
  CHECK(tokenize("What is New York 's score ?") == std::vector<std::string>{"what", "is", "new", "york", "'s", "score"});
  CHECK(tokenize("7:15 and 26-30, 1.5!") == std::vector<std::string>{"7:15", "and", "26-30", "1.5"});
  CHECK(normalize_value("New York") == "new^york");
  CHECK(normalize_value(normalize_value("New  York!")) == normalize_value("New  York!"));
  CHECK(normalize_header("Benalla  DFL") == "benalla dfl");
  CHECK(parse_number("12") == 12.0);
  CHECK(parse_number("1.5") == 1.5);
  CHECK_FALSE(parse_number("12abc").has_value());
  CHECK_FALSE(parse_number("").has_value());
}

TEST_CASE("execute: count with an order condition") {
  auto r = execute(query(SqlType::Count, "name", {{"score", Comparator::Gt, "1"}}), score_table());
  CHECK(r.kind == ExecResult::Kind::Number);
  CHECK(r.number == 1.0);
}

TEST_CASE("execute: full scan select") {
  auto r = execute(query(SqlType::Select, "name"), score_table());
  CHECK(r.kind == ExecResult::Kind::Cells);
  CHECK(r.cells == std::vector<std::string>{"a", "b"});
}

TEST_CASE("execute: aggregate over no passing rows is empty, count is zero") {
  auto t = score_table();
  auto r = execute(query(SqlType::Min, "score", {{"name", Comparator::Eq, "zzz"}}), t);
  CHECK(r.kind == ExecResult::Kind::Empty);
  auto c = execute(query(SqlType::Count, "score", {{"name", Comparator::Eq, "zzz"}}), t);
  CHECK(c.kind == ExecResult::Kind::Number);
  CHECK(c.number == 0.0);
  CHECK_FALSE(results_equal(r, c));
}

TEST_CASE("execute: order comparators on text are false, unknown columns throw") {
  auto t = score_table();
  auto r = execute(query(SqlType::Count, "score", {{"name", Comparator::Gt, "0"}}), t);
  CHECK(r.number == 0.0);
  CHECK_THROWS(execute(query(SqlType::Count, "nope"), t));
  CHECK(condition_holds({"x", Comparator::Eq, "new^york"}, "New York"));
  CHECK_FALSE(condition_holds({"x", Comparator::Le, "3"}, "n/a"));
}

TEST_CASE("execute agrees with the naive oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto c = ptmaml::testing::random_exec_case(rng);
    auto got = execute(c.query, c.table);
    auto want = ptmaml::testing::oracle_execute(c.query, c.table);
    INFO(canonicalize(c.query));
    REQUIRE(static_cast<int>(got.kind) == static_cast<int>(want.kind));
    if (want.kind == ptmaml::testing::OracleResult::Cells) CHECK(got.cells == want.cells);
    if (want.kind == ptmaml::testing::OracleResult::Number) CHECK(std::abs(got.number - want.number) <= 1e-9);
  }
}

TEST_CASE("grammar: start, after where, after a value") {
  GrammarState s;
  auto a = s.allowed();
  CHECK(terminals(a) == std::set<Terminal>{Terminal::Select});
  CHECK_FALSE(a.column);
  CHECK_FALSE(a.constant);

  s.advance_terminal(Terminal::Select);
  CHECK(terminals(s.allowed()) ==
        std::set<Terminal>{Terminal::Id, Terminal::Max, Terminal::Min, Terminal::Count, Terminal::Sum, Terminal::Avg});
  s.advance_terminal(Terminal::Count);
  CHECK(s.allowed().column);
  s.advance_copy(DecodeTag::Column);
  s.advance_terminal(Terminal::From);
  CHECK(s.allowed().table);
  s.advance_copy(DecodeTag::Column);
  s.advance_terminal(Terminal::Where);

  auto w = s.allowed();
  CHECK(w.column);
  CHECK_FALSE(w.constant);
  CHECK(terminals(w) == std::set<Terminal>{Terminal::End});

  s.advance_copy(DecodeTag::Column);
  auto cmp = s.allowed();
  CHECK_FALSE(cmp.column);
  CHECK(terminals(cmp) ==
        std::set<Terminal>{Terminal::Eq, Terminal::Gt, Terminal::Ge, Terminal::Lt, Terminal::Le});
  s.advance_terminal(Terminal::Lt);
  CHECK(s.allowed().constant);
  CHECK(s.allowed().terminals.empty());
  s.advance_copy(DecodeTag::Constant);

  auto after = s.allowed();
  CHECK(after.column);
  CHECK(terminals(after) == std::set<Terminal>{Terminal::End});
  s.advance_terminal(Terminal::End);
  CHECK(s.accepting());
  CHECK_THROWS_AS(s.allowed(), GrammarError);
}

TEST_CASE("grammar: illegal moves throw") {
  GrammarState s;
  CHECK_THROWS_AS(s.advance_terminal(Terminal::From), GrammarError);
  CHECK_THROWS_AS(s.advance_copy(DecodeTag::Column), GrammarError);
  s.advance_terminal(Terminal::Select);
  CHECK_THROWS_AS(s.advance_copy(DecodeTag::Constant), GrammarError);
  CHECK_THROWS_AS(s.advance_terminal(Terminal::And), GrammarError);
}

TEST_CASE("grammar: random walks to acceptance match the tag pattern") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    GrammarState s;
    std::size_t steps = 0;
    while (!s.accepting()) {
      auto a = s.allowed();
      std::vector<int> moves;
      for (std::size_t k = 0; k < a.terminals.size(); ++k) moves.push_back(static_cast<int>(k));
      if (a.column || a.table) moves.push_back(-1);
      if (a.constant) moves.push_back(-2);
      REQUIRE_FALSE(moves.empty());
      int m = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
      // bias towards ending so walks stay short
      if (s.conditions() > 3 && !a.terminals.empty() && a.terminals.back() == Terminal::End) m = 0;
      if (m >= 0) s.advance_terminal(a.terminals[static_cast<std::size_t>(m)]);
      else s.advance_copy(m == -1 ? DecodeTag::Column : DecodeTag::Constant);
      REQUIRE(++steps < 200);
    }
    CHECK(matches_tag_pattern(tag_string(s.history())));
  }
  CHECK(matches_tag_pattern("VVCVCVV"));
  CHECK(matches_tag_pattern("VVCVCVCVQV"));
  CHECK(matches_tag_pattern("VVCVCVCVQCVQV"));
  CHECK_FALSE(matches_tag_pattern("VVCVCV"));
  CHECK_FALSE(matches_tag_pattern("VVCVC"));
  CHECK_FALSE(matches_tag_pattern("VVCVCVCVV"));
}

TEST_CASE("decode_sequence renders back to canonical text") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto f = fuzz_query(rng);
    auto steps = decode_sequence(f.q);
    CHECK(render_steps(steps) == canonicalize(f.q));
    GrammarState s;
    for (const auto& st : steps) {
      if (st.tag == DecodeTag::Operator) s.advance_terminal(st.terminal);
      else s.advance_copy(st.tag);
    }
    CHECK(s.accepting());
    CHECK(s.steps_to_accept() == 0);
  }
  GrammarState fresh;
  CHECK(fresh.steps_to_accept() == 7);
}

TEST_CASE("logical form match") {
  auto g = query(SqlType::Select, "name", {{"score", Comparator::Eq, "1"}, {"name", Comparator::Eq, "a"}});
  auto swapped = query(SqlType::Select, "name", {{"name", Comparator::Eq, "a"}, {"score", Comparator::Eq, "1"}});
  auto lt = query(SqlType::Select, "name", {{"score", Comparator::Lt, "1"}, {"name", Comparator::Eq, "a"}});
  CHECK(logical_form_match(g, g));
  CHECK(logical_form_match(swapped, g));
  CHECK_FALSE(logical_form_match(swapped, g, true));
  CHECK_FALSE(logical_form_match(lt, g));
  auto dup = query(SqlType::Select, "name", {{"score", Comparator::Eq, "1"}, {"score", Comparator::Eq, "1"}});
  CHECK_FALSE(logical_form_match(dup, query(SqlType::Select, "name", {{"score", Comparator::Eq, "1"}})));
}

TEST_CASE("execution match") {
  auto t = score_table();
  auto a = query(SqlType::Select, "name", {{"score", Comparator::Eq, "2"}});
  auto b = query(SqlType::Select, "name", {{"name", Comparator::Eq, "b"}});
  CHECK(execution_match(a, a, t));
  CHECK(execution_match(a, b, t));
  CHECK_FALSE(execution_match(query(SqlType::Count, "name"), query(SqlType::Select, "name"), t));
  CHECK_FALSE(execution_match(query(SqlType::Select, "nope"), a, t));
  CHECK_THROWS_AS(execution_match(a, query(SqlType::Select, "nope"), t), ExecError);
}

TEST_CASE("logical form match implies execution match") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    auto c = ptmaml::testing::random_exec_case(rng);
    auto shuffled = c.query;
    std::shuffle(shuffled.conds.begin(), shuffled.conds.end(), rng);
    REQUIRE(logical_form_match(shuffled, c.query));
    CHECK(execution_match(shuffled, c.query, c.table));
  }
}

TEST_CASE("table json round trip and validation") {
  auto t = score_table();
  CHECK(table_from_json(table_to_json(t)) == t);
  Table ragged{"r", {"a", "b"}, {{"1"}}};
  CHECK_THROWS_AS(ragged.validate(), std::invalid_argument);
  Table dup{"d", {"a", "a"}, {}};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}
