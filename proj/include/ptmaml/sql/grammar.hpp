#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptmaml/sql/query.hpp"

namespace ptmaml::sql {

/// The 17 operator terminals. `Id` is the identity aggregator (plain
/// select). `And` and `Go` are never decoded: And is implied when a new
/// condition column follows a value, and Go is the implicit first input.
enum class Terminal {
  Select, From, Where, Id, Max, Min, Count, Sum, Avg, And,
  Eq, Gt, Ge, Lt, Le, End, Go,
};
inline constexpr std::size_t kTerminalCount = 17;

std::string_view terminal_text(Terminal t);
Terminal aggregator_terminal(SqlType t);
std::optional<SqlType> terminal_aggregator(Terminal t);
Terminal comparator_terminal(Comparator c);
std::optional<Comparator> terminal_comparator(Terminal t);

/// Decoding types: operator terminal, column copy, constant copy.
enum class DecodeTag { Operator, Column, Constant };
char tag_letter(DecodeTag t);  // 'V', 'C', 'Q'

enum class Slot {
  Select,          // V {Select}
  Aggregator,      // V {Id, Max, Min, Count, Sum, Avg}
  SelectColumn,    // C column
  From,            // V {From}
  Table,           // C table id
  Where,           // V {Where}
  ConditionOrEnd,  // C column (new condition) | V {End}
  Comparator,      // V {=, >, >=, <, <=}
  Value,           // Q constant
  Accepted,
};

struct AllowedNext {
  std::vector<Terminal> terminals;  // legal operator terminals, empty if V is illegal
  bool column = false;              // C copy of a column name
  bool table = false;               // C copy of the table id
  bool constant = false;            // Q copy from the question

  std::vector<DecodeTag> tags() const;
};

class GrammarError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Automaton for V V C V C V (C V Q)* V(end).
class GrammarState {
public:
  Slot slot() const { return slot_; }
  bool accepting() const { return slot_ == Slot::Accepted; }
  const std::vector<DecodeTag>& history() const { return history_; }
  std::size_t conditions() const { return conditions_; }

  /// Legal next moves. Throws GrammarError in the accepting state.
  AllowedNext allowed() const;

  void advance_terminal(Terminal t);
  /// Column/table/constant copies. Throws GrammarError if illegal here.
  void advance_copy(DecodeTag tag);

  /// Minimum number of further steps needed to reach acceptance.
  std::size_t steps_to_accept() const;

private:
  Slot slot_ = Slot::Select;
  std::vector<DecodeTag> history_;
  std::size_t conditions_ = 0;
};

AllowedNext grammar_allowed_tags(const GrammarState& state);

/// "VVCVCV...V" for a tag history.
std::string tag_string(const std::vector<DecodeTag>& tags);

/// True iff `tags` matches V V C V C V (C V Q)* V.
bool matches_tag_pattern(std::string_view tags);

struct DecodeStep {
  DecodeTag tag = DecodeTag::Operator;
  Terminal terminal = Terminal::End;  // Operator steps
  std::string text;                   // column name, table id or constant

  friend bool operator==(const DecodeStep&, const DecodeStep&) = default;
};

/// Gold step sequence of a query, walked through the automaton.
std::vector<DecodeStep> decode_sequence(const SqlQuery& q);

/// Renders a complete step sequence as canonical SQL text. Throws
/// GrammarError if the steps are not accepted by the automaton.
std::string render_steps(const std::vector<DecodeStep>& steps);

} // namespace ptmaml::sql
