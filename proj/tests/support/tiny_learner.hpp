#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ptmaml/data/synthetic.hpp"
#include "ptmaml/learner/model.hpp"
#include "ptmaml/sql/grammar.hpp"

namespace ptmaml::testing {

inline data::SynthCorpus small_corpus(std::uint64_t seed, int n_train = 80, int n_eval = 20) {
  data::SynthConfig cfg;
  cfg.n_tables = 10;
  cfg.rows_per_table = 6;
  cfg.n_train = n_train;
  cfg.n_dev = n_eval;
  cfg.n_test = n_eval;
  cfg.entity_vocab = 60;
  cfg.seed = seed;
  return data::generate_synthetic(cfg);
}

/// embed 8, hidden 8, one layer each way.
inline learner::LearnerConfig tiny_config(learner::CellKind cell = learner::CellKind::Gru) {
  learner::LearnerConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  cfg.encoder_layers = 1;
  cfg.decoder_layers = 1;
  cfg.cell = cell;
  return cfg;
}

/// Largest number of legal gold positions over the copy steps.
inline std::size_t max_target_multiplicity(const learner::Seq2Sql& model, const ad::ParamSet& theta,
                                           const data::Example& ex) {
  auto in = model.layout(ex);
  auto dists = model.step_distributions(theta, ex);
  auto steps = sql::decode_sequence(ex.gold);
  std::size_t most = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].tag == sql::DecodeTag::Operator) continue;
    most = std::max(most, learner::gold_candidates(dists[i].candidates, in, steps[i], ex.id).size());
  }
  return most;
}

/// Same example with question mentions of column names replaced by a
/// filler word, so each column target is only copyable from the header.
inline data::Example without_column_mentions(const data::Example& ex) {
  data::Example out = ex;
  for (auto& tok : out.tokens) {
    for (const auto& h : ex.header) {
      if (tok == learner::collapsed_header(h)) tok = "thing";
    }
  }
  return out;
}

} // namespace ptmaml::testing
