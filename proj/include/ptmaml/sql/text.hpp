#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ptmaml::sql {

/// Joiner used when a multiword entity is collapsed to one token.
inline constexpr char kEntityJoiner = '^';

/// Lowercases, splits on whitespace and strips leading/trailing punctuation.
/// Tokens made only of punctuation are dropped. Internal punctuation
/// ("7:15", "26-30", "1.5") and the entity joiner are kept.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Canonical form of a cell or constant: its tokens joined by '^'.
/// Idempotent.
std::string normalize_value(std::string_view text);

/// Canonical form of a column name: its tokens joined by single spaces.
std::string normalize_header(std::string_view text);

/// Parses the whole string as a finite decimal number.
std::optional<double> parse_number(std::string_view text);

} // namespace ptmaml::sql
