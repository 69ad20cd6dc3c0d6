#include "ptmaml/sql/grammar.hpp"

namespace ptmaml::sql {

std::string_view terminal_text(Terminal t) {
  switch (t) {
    case Terminal::Select: return "SELECT";
    case Terminal::From: return "FROM";
    case Terminal::Where: return "WHERE";
    case Terminal::Id: return "ID";
    case Terminal::Max: return "MAX";
    case Terminal::Min: return "MIN";
    case Terminal::Count: return "COUNT";
    case Terminal::Sum: return "SUM";
    case Terminal::Avg: return "AVG";
    case Terminal::And: return "AND";
    case Terminal::Eq: return "=";
    case Terminal::Gt: return ">";
    case Terminal::Ge: return ">=";
    case Terminal::Lt: return "<";
    case Terminal::Le: return "<=";
    case Terminal::End: return "<END>";
    case Terminal::Go: return "<GO>";
  }
  return "?";
}

Terminal aggregator_terminal(SqlType t) {
  switch (t) {
    case SqlType::Count: return Terminal::Count;
    case SqlType::Min: return Terminal::Min;
    case SqlType::Max: return Terminal::Max;
    case SqlType::Sum: return Terminal::Sum;
    case SqlType::Avg: return Terminal::Avg;
    case SqlType::Select: return Terminal::Id;
  }
  return Terminal::Id;
}

std::optional<SqlType> terminal_aggregator(Terminal t) {
  switch (t) {
    case Terminal::Count: return SqlType::Count;
    case Terminal::Min: return SqlType::Min;
    case Terminal::Max: return SqlType::Max;
    case Terminal::Sum: return SqlType::Sum;
    case Terminal::Avg: return SqlType::Avg;
    case Terminal::Id: return SqlType::Select;
    default: return std::nullopt;
  }
}

Terminal comparator_terminal(Comparator c) {
  switch (c) {
    case Comparator::Eq: return Terminal::Eq;
    case Comparator::Gt: return Terminal::Gt;
    case Comparator::Ge: return Terminal::Ge;
    case Comparator::Lt: return Terminal::Lt;
    case Comparator::Le: return Terminal::Le;
  }
  return Terminal::Eq;
}

std::optional<Comparator> terminal_comparator(Terminal t) {
  switch (t) {
    case Terminal::Eq: return Comparator::Eq;
    case Terminal::Gt: return Comparator::Gt;
    case Terminal::Ge: return Comparator::Ge;
    case Terminal::Lt: return Comparator::Lt;
    case Terminal::Le: return Comparator::Le;
    default: return std::nullopt;
  }
}

char tag_letter(DecodeTag t) {
  switch (t) {
    case DecodeTag::Operator: return 'V';
    case DecodeTag::Column: return 'C';
    case DecodeTag::Constant: return 'Q';
  }
  return '?';
}

std::vector<DecodeTag> AllowedNext::tags() const {
  std::vector<DecodeTag> out;
  if (!terminals.empty()) out.push_back(DecodeTag::Operator);
  if (column || table) out.push_back(DecodeTag::Column);
  if (constant) out.push_back(DecodeTag::Constant);
  return out;
}

AllowedNext GrammarState::allowed() const {
  AllowedNext a;
  switch (slot_) {
    case Slot::Select: a.terminals = {Terminal::Select}; break;
    case Slot::Aggregator:
      a.terminals = {Terminal::Id, Terminal::Max, Terminal::Min, Terminal::Count, Terminal::Sum, Terminal::Avg};
      break;
    case Slot::SelectColumn: a.column = true; break;
    case Slot::From: a.terminals = {Terminal::From}; break;
    case Slot::Table: a.table = true; break;
    case Slot::Where: a.terminals = {Terminal::Where}; break;
    case Slot::ConditionOrEnd:
      a.terminals = {Terminal::End};
      a.column = true;
      break;
    case Slot::Comparator:
      a.terminals = {Terminal::Eq, Terminal::Gt, Terminal::Ge, Terminal::Lt, Terminal::Le};
      break;
    case Slot::Value: a.constant = true; break;
    case Slot::Accepted: throw GrammarError("no moves after <END>");
  }
  return a;
}

AllowedNext grammar_allowed_tags(const GrammarState& state) { return state.allowed(); }

void GrammarState::advance_terminal(Terminal t) {
  AllowedNext a = allowed();
  bool ok = false;
  for (Terminal x : a.terminals) ok = ok || x == t;
  if (!ok) throw GrammarError("terminal " + std::string(terminal_text(t)) + " is illegal here");
  history_.push_back(DecodeTag::Operator);
  switch (slot_) {
    case Slot::Select: slot_ = Slot::Aggregator; break;
    case Slot::Aggregator: slot_ = Slot::SelectColumn; break;
    case Slot::From: slot_ = Slot::Table; break;
    case Slot::Where: slot_ = Slot::ConditionOrEnd; break;
    case Slot::ConditionOrEnd: slot_ = Slot::Accepted; break;
    case Slot::Comparator: slot_ = Slot::Value; break;
    default: break;
  }
}

void GrammarState::advance_copy(DecodeTag tag) {
  if (tag == DecodeTag::Operator) throw GrammarError("operator tag needs a terminal");
  AllowedNext a = allowed();
  bool ok = tag == DecodeTag::Column ? (a.column || a.table) : a.constant;
  if (!ok) throw GrammarError(std::string("tag ") + tag_letter(tag) + " is illegal here");
  history_.push_back(tag);
  switch (slot_) {
    case Slot::SelectColumn: slot_ = Slot::From; break;
    case Slot::Table: slot_ = Slot::Where; break;
    case Slot::ConditionOrEnd:
      slot_ = Slot::Comparator;
      ++conditions_;
      break;
    case Slot::Value: slot_ = Slot::ConditionOrEnd; break;
    default: break;
  }
}

std::size_t GrammarState::steps_to_accept() const {
  switch (slot_) {
    case Slot::Select: return 7;
    case Slot::Aggregator: return 6;
    case Slot::SelectColumn: return 5;
    case Slot::From: return 4;
    case Slot::Table: return 3;
    case Slot::Where: return 2;
    case Slot::ConditionOrEnd: return 1;
    case Slot::Comparator: return 3;
    case Slot::Value: return 2;
    case Slot::Accepted: return 0;
  }
  return 0;
}

std::string tag_string(const std::vector<DecodeTag>& tags) {
  std::string s;
  for (DecodeTag t : tags) s += tag_letter(t);
  return s;
}

bool matches_tag_pattern(std::string_view tags) {
  constexpr std::string_view prefix = "VVCVCV";
  if (tags.size() < prefix.size() + 1 || tags.substr(0, prefix.size()) != prefix || tags.back() != 'V') {
    return false;
  }
  std::string_view loop = tags.substr(prefix.size(), tags.size() - prefix.size() - 1);
  if (loop.size() % 3 != 0) return false;
  for (std::size_t i = 0; i < loop.size(); i += 3) {
    if (loop.substr(i, 3) != "CVQ") return false;
  }
  return true;
}

std::vector<DecodeStep> decode_sequence(const SqlQuery& q) {
  std::vector<DecodeStep> steps;
  auto op = [&](Terminal t) { steps.push_back({DecodeTag::Operator, t, {}}); };
  auto copy = [&](DecodeTag tag, const std::string& text) { steps.push_back({tag, Terminal::End, text}); };
  op(Terminal::Select);
  op(aggregator_terminal(q.agg));
  copy(DecodeTag::Column, q.select_col);
  op(Terminal::From);
  copy(DecodeTag::Column, q.table);
  op(Terminal::Where);
  for (const auto& c : q.conds) {
    copy(DecodeTag::Column, c.column);
    op(comparator_terminal(c.op));
    copy(DecodeTag::Constant, c.value);
  }
  op(Terminal::End);
  return steps;
}

std::string render_steps(const std::vector<DecodeStep>& steps) {
  GrammarState state;
  SqlQuery q;
  Condition pending;
  for (const auto& step : steps) {
    Slot at = state.slot();
    if (step.tag == DecodeTag::Operator) {
      state.advance_terminal(step.terminal);
      if (at == Slot::Aggregator) q.agg = *terminal_aggregator(step.terminal);
      if (at == Slot::Comparator) pending.op = *terminal_comparator(step.terminal);
    } else {
      state.advance_copy(step.tag);
      switch (at) {
        case Slot::SelectColumn: q.select_col = step.text; break;
        case Slot::Table: q.table = step.text; break;
        case Slot::ConditionOrEnd: pending.column = step.text; break;
        case Slot::Value:
          pending.value = step.text;
          q.conds.push_back(pending);
          break;
        default: break;
      }
    }
  }
  if (!state.accepting()) throw GrammarError("step sequence ends before <END>");
  return canonicalize(q);
}

} // namespace ptmaml::sql
