#pragma once

#include <string>
#include <vector>

#include "ptmaml/data/dataset.hpp"

namespace ptmaml::data {

/// Header names normalized; cells left as-is (the executor normalizes cells
/// when comparing).
sql::Table normalize_table(const sql::Table& raw);

/// Collapses maximal phrases that equal a table cell into one '^'-joined
/// token, scanning left to right and taking the longest match at each
/// position.
std::vector<std::string> collapse_entities(const std::vector<std::string>& tokens, const sql::Table& table);

/// Lowercases and tokenizes the question, collapses entities, and
/// normalizes the gold query (header names, constants) the same way so copy
/// targets align with question tokens. `table` may be raw or normalized.
Example normalize_example(const RawExample& raw, const sql::Table& table, int id = 0);

/// Normalizes an already-normalized example again; a fixed point.
Example renormalize(const Example& ex, const sql::Table& table);

/// Train split: keeps examples whose every condition value is a question
/// token. Evaluation-only splits pass through unchanged.
Dataset filter_copyable(const Dataset& ds);

bool constants_copyable(const Example& ex);

/// Token count after entity collapsing.
inline int question_length(const Example& ex) { return static_cast<int>(ex.tokens.size()); }

} // namespace ptmaml::data
