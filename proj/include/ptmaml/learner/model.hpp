#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptmaml/autodiff/graph.hpp"
#include "ptmaml/data/dataset.hpp"
#include "ptmaml/learner/config.hpp"
#include "ptmaml/learner/vocab.hpp"
#include "ptmaml/sql/grammar.hpp"

namespace ptmaml::learner {

/// Raised when a gold copy target has no legal position in the input.
class TargetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Encoder input: [table slot] header... <sep> question...
struct InputLayout {
  std::vector<std::string> tokens;
  std::vector<std::size_t> ids;
  std::size_t question_begin = 0;
  /// Column index a position stands for: every header position, plus
  /// question positions whose token is a collapsed column name.
  std::vector<std::optional<std::size_t>> column_at;
};

/// Legal moves at one decode step. Terminals are scored first, then
/// positions in ascending order.
struct Candidates {
  std::vector<sql::Terminal> terminals;
  std::vector<std::size_t> positions;
  sql::DecodeTag copy_tag = sql::DecodeTag::Column;

  std::size_t size() const { return terminals.size() + positions.size(); }
};

struct DecodeStepDist {
  sql::DecodeTag tag = sql::DecodeTag::Operator;  // gold tag of the step
  Candidates candidates;
  std::vector<double> probs;
};

struct Prediction {
  std::optional<sql::SqlQuery> query;  // empty when the decode was truncated
  std::string text;
  std::vector<sql::DecodeTag> tags;
  bool truncated = false;
};

class Seq2Sql {
public:
  Seq2Sql(LearnerConfig cfg, Vocab vocab);

  const LearnerConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }

  /// Uniform(-r, r), r = 1/sqrt(hidden_dim).
  ad::ParamSet init_params(std::uint64_t seed) const;

  InputLayout layout(const data::Example& ex) const;

  /// Total teacher-forced loss; `g` must be bound to the parameters.
  ad::NodeId build_loss(ad::Graph& g, const data::Example& ex, LossKind kind) const;
  ad::NodeId build_loss(ad::Graph& g, const data::Example& ex) const { return build_loss(g, ex, cfg_.loss); }

  /// Loss value, with gradients accumulated into `grads` when given.
  double loss(const ad::ParamSet& theta, const data::Example& ex, LossKind kind,
              ad::GradStore* grads = nullptr) const;

  /// Per-step losses of the non-forced steps, in decode order.
  std::vector<double> step_losses(const ad::ParamSet& theta, const data::Example& ex, LossKind kind) const;

  /// Teacher-forced candidate distributions for every decode step.
  std::vector<DecodeStepDist> step_distributions(const ad::ParamSet& theta, const data::Example& ex) const;

  Prediction predict(const ad::ParamSet& theta, const data::Example& ex) const;

private:
  struct Run;
  LearnerConfig cfg_;
  Vocab vocab_;
};

/// Gold copy positions of a step among its candidates (indices into the
/// joint candidate list). Throws TargetError if there are none.
std::vector<std::size_t> gold_candidates(const Candidates& cands, const InputLayout& in,
                                         const sql::DecodeStep& step, int example_id);

/// Candidate set for the grammar state. `budget` is the number of decode
/// steps still available; a new condition is only offered if it can finish.
Candidates legal_candidates(const sql::GrammarState& state, const InputLayout& in, std::size_t budget);

} // namespace ptmaml::learner
