#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ptmaml/data/dataset.hpp"

namespace ptmaml::data {

/// Question templates use two placeholders: {sel} for the select column and
/// {conds} for the rendered conditions.
struct SynthConfig {
  int n_tables = 64;
  int rows_per_table = 10;
  int n_train = 600;
  int n_dev = 100;
  int n_test = 100;
  int entity_vocab = 400;       // distinct text cell values
  int max_number = 60;          // numeric cells are integers in [1, max_number]
  int max_conditions = 3;
  std::map<sql::SqlType, std::vector<std::string>> templates = default_templates();
  std::uint64_t seed = 1;

  static std::map<sql::SqlType, std::vector<std::string>> default_templates();
  /// Throws std::invalid_argument if a type has no template or a count is
  /// not positive.
  void validate() const;
};

struct SynthCorpus {
  std::vector<sql::Table> tables;  // raw, all splits
  std::vector<RawExample> raw_train, raw_dev, raw_test;
  Dataset train, dev, test;        // normalized
};

/// Random tables and template-instantiated questions. Each split draws from
/// its own tables. Every condition constant is written into the question,
/// and each type's templates carry words no other type uses.
SynthCorpus generate_synthetic(const SynthConfig& cfg);

} // namespace ptmaml::data
