#include "ptmaml/sql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace ptmaml::sql {

namespace {

std::string squeeze_spaces(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[pos + i])) != std::toupper(static_cast<unsigned char>(word[i]))) {
      return false;
    }
  }
  return true;
}

/// Keyword followed by a space or the end of input.
bool keyword_at(std::string_view text, std::size_t pos, std::string_view kw) {
  return iequals_at(text, pos, kw) && (pos + kw.size() == text.size() || text[pos + kw.size()] == ' ');
}

struct ComparatorSpelling {
  std::string_view text;
  Comparator op;
};

constexpr ComparatorSpelling kComparators[] = {
    {">=", Comparator::Ge}, {"<=", Comparator::Le}, {"≥", Comparator::Ge},
    {"≤", Comparator::Le}, {"=", Comparator::Eq}, {">", Comparator::Gt}, {"<", Comparator::Lt},
};

class Parser {
public:
  Parser(std::string text, const Table& table) : s_(std::move(text)), table_(table) {
    for (std::size_t i = 0; i < table.header.size(); ++i) by_length_.push_back(i);
    std::stable_sort(by_length_.begin(), by_length_.end(), [&](std::size_t a, std::size_t b) {
      return table.header[a].size() > table.header[b].size();
    });
  }

  SqlQuery run() {
    SqlQuery q;
    expect_keyword("SELECT");
    parse_select(q);
    expect_keyword("FROM");
    std::size_t end = s_.find(' ', pos_);
    if (end == std::string::npos) end = s_.size();
    q.table = s_.substr(pos_, end - pos_);
    if (q.table.empty()) throw ParseError("missing table name", pos_);
    if (q.table != table_.id) {
      throw ParseError("unknown table '" + q.table + "' (expected '" + table_.id + "')", pos_);
    }
    pos_ = end;
    skip_space();
    if (pos_ == s_.size()) return q;
    expect_keyword("WHERE");
    while (true) {
      Condition c;
      std::size_t at = pos_;
      auto head = match_condition_head(pos_);
      if (!head) throw ParseError("unknown column in condition near '" + s_.substr(at, 24) + "'", at);
      c.column = table_.header[head->column];
      c.op = head->op;
      pos_ = head->value_start;
      std::size_t value_end = find_value_end(pos_);
      c.value = s_.substr(pos_, value_end - pos_);
      if (c.value.empty()) throw ParseError("missing condition value", pos_);
      q.conds.push_back(std::move(c));
      pos_ = value_end;
      if (pos_ == s_.size()) break;
      skip_space();
      expect_keyword("AND");
    }
    return q;
  }

private:
  struct CondHead {
    std::size_t column;
    Comparator op;
    std::size_t value_start;
  };

  void skip_space() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }

  void expect_keyword(std::string_view kw) {
    skip_space();
    if (!keyword_at(s_, pos_, kw)) throw ParseError("expected " + std::string(kw), pos_);
    pos_ += kw.size();
    skip_space();
  }

  bool header_at(std::size_t col, std::size_t pos) const {
    const std::string& h = table_.header[col];
    return !h.empty() && s_.compare(pos, h.size(), h) == 0;
  }

  void parse_select(SqlQuery& q) {
    for (SqlType t : kAllSqlTypes) {
      if (t == SqlType::Select) continue;
      std::string_view kw = aggregator_keyword(t);
      if (!iequals_at(s_, pos_, kw)) continue;
      std::size_t p = pos_ + kw.size();
      while (p < s_.size() && s_[p] == ' ') ++p;
      if (p >= s_.size() || s_[p] != '(') continue;
      ++p;
      while (p < s_.size() && s_[p] == ' ') ++p;
      for (std::size_t col : by_length_) {
        if (!header_at(col, p)) continue;
        std::size_t after = p + table_.header[col].size();
        while (after < s_.size() && s_[after] == ' ') ++after;
        if (after < s_.size() && s_[after] == ')' && keyword_follows(after + 1, "FROM")) {
          q.agg = t;
          q.select_col = table_.header[col];
          pos_ = after + 1;
          return;
        }
      }
    }
    for (std::size_t col : by_length_) {
      if (header_at(col, pos_) && keyword_follows(pos_ + table_.header[col].size(), "FROM")) {
        q.agg = SqlType::Select;
        q.select_col = table_.header[col];
        pos_ += table_.header[col].size();
        return;
      }
    }
    std::size_t from = pos_;
    while (from < s_.size() && !(s_[from] == ' ' && keyword_at(s_, from + 1, "FROM"))) ++from;
    std::string name = s_.substr(pos_, from - pos_);
    if (name.empty()) throw ParseError("missing select column", pos_);
    throw ParseError("unknown column '" + name + "'", pos_);
  }

  bool keyword_follows(std::size_t p, std::string_view kw) const {
    return p < s_.size() && s_[p] == ' ' && keyword_at(s_, p + 1, kw);
  }

  std::optional<CondHead> match_condition_head(std::size_t p) const {
    for (std::size_t col : by_length_) {
      if (!header_at(col, p)) continue;
      std::size_t q = p + table_.header[col].size();
      if (q >= s_.size() || s_[q] != ' ') continue;
      ++q;
      for (const auto& cmp : kComparators) {
        if (s_.compare(q, cmp.text.size(), cmp.text) == 0) {
          std::size_t v = q + cmp.text.size();
          if (v < s_.size() && s_[v] == ' ') return CondHead{col, cmp.op, v + 1};
        }
      }
    }
    return std::nullopt;
  }

  std::size_t find_value_end(std::size_t p) const {
    for (std::size_t i = p; i + 5 <= s_.size(); ++i) {
      if (s_[i] == ' ' && iequals_at(s_, i + 1, "AND") && i + 4 < s_.size() && s_[i + 4] == ' ' &&
          match_condition_head(i + 5)) {
        return i;
      }
    }
    return s_.size();
  }

  std::string s_;
  const Table& table_;
  std::vector<std::size_t> by_length_;
  std::size_t pos_ = 0;
};

} // namespace

SqlQuery parse_sql(std::string_view text, const Table& table) {
  return Parser(squeeze_spaces(text), table).run();
}

} // namespace ptmaml::sql
