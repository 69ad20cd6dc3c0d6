#pragma once

#include <random>
#include <span>
#include <vector>

#include "ptmaml/autodiff/optim.hpp"
#include "ptmaml/data/dataset.hpp"
#include "ptmaml/learner/model.hpp"
#include "ptmaml/meta/config.hpp"

namespace ptmaml::meta {

/// A loss over indexed samples. Gradients are accumulated into `grad`.
class Objective {
public:
  virtual ~Objective() = default;
  virtual std::size_t size() const = 0;
  virtual double loss_and_grad(const ad::ParamSet& theta, std::size_t sample, ad::GradStore& grad) const = 0;
};

/// Sample i is dataset.examples[i].
class LearnerObjective : public Objective {
public:
  LearnerObjective(const learner::Seq2Sql& model, const data::Dataset& ds, learner::LossKind kind)
      : model_(model), ds_(ds), kind_(kind) {}
  std::size_t size() const override { return ds_.examples.size(); }
  double loss_and_grad(const ad::ParamSet& theta, std::size_t sample, ad::GradStore& grad) const override;

private:
  const learner::Seq2Sql& model_;
  const data::Dataset& ds_;
  learner::LossKind kind_;
};

/// Support and test samples of one episode, as objective indices.
struct Task {
  std::vector<std::size_t> support;
  std::size_t test = 0;
};

/// `steps` plain gradient steps on the mean support loss, starting from
/// theta. An empty support returns theta unchanged (with a warning).
ad::ParamSet inner_update(const ad::ParamSet& theta, const Objective& obj, std::span<const std::size_t> support,
                          double alpha, int steps);

struct StepStats {
  double loss = 0.0;       // summed test loss (meta) or batch loss (baseline)
  double grad_norm = 0.0;  // before clipping
};

/// First-order meta-gradient: sum over tasks of the test-loss gradient at
/// the adapted parameters. Written into `grad` (overwritten).
StepStats meta_gradient(const ad::ParamSet& theta, const Objective& obj, std::span<const Task> tasks,
                        const MetaConfig& cfg, ad::GradStore& grad);

/// meta_gradient, then clip, annealed noise and Adagrad at rate beta.
/// Throws ad::NonFiniteError if the gradient is not finite.
StepStats meta_batch_step(ad::ParamSet& theta, const Objective& obj, std::span<const Task> tasks,
                          const MetaConfig& cfg, ad::AdagradState& state, std::mt19937_64& noise_rng);

/// Summed gradient of the batch at theta, then the same optimizer stack at
/// rate optim.learning_rate.
StepStats baseline_step(ad::ParamSet& theta, const Objective& obj, std::span<const std::size_t> batch,
                        const MetaConfig& cfg, ad::AdagradState& state, std::mt19937_64& noise_rng);

} // namespace ptmaml::meta
