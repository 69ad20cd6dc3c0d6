#include "ptmaml/sql/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace ptmaml::sql {

namespace {

bool leading_punct(char c) {
  switch (c) {
    case ',': case '.': case '?': case '!': case ';': case ':': case '"':
    case '(': case ')': case '[': case ']': case '{': case '}': case '`':
      return true;
    default:
      return false;
  }
}

bool trailing_punct(char c) { return leading_punct(c) || c == '\''; }

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view word = text.substr(start, i - start);
    while (!word.empty() && leading_punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && trailing_punct(word.back())) word.remove_suffix(1);
    if (word.empty()) continue;
    std::string tok(word);
    for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string normalize_value(std::string_view text) {
  return join(tokenize(text), std::string_view(&kEntityJoiner, 1));
}

std::string normalize_header(std::string_view text) { return join(tokenize(text), " "); }

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

} // namespace ptmaml::sql
