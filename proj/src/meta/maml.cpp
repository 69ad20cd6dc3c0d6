#include "ptmaml/meta/maml.hpp"

#include <cmath>
#include <iostream>

namespace ptmaml::meta {

double LearnerObjective::loss_and_grad(const ad::ParamSet& theta, std::size_t sample, ad::GradStore& grad) const {
  return model_.loss(theta, ds_.examples.at(sample), kind_, &grad);
}

ad::ParamSet inner_update(const ad::ParamSet& theta, const Objective& obj, std::span<const std::size_t> support,
                          double alpha, int steps) {
  if (support.empty()) {
    std::cerr << "warning: empty support set, parameters left unadapted\n";
    return theta;
  }
  ad::ParamSet adapted = theta;
  if (alpha == 0.0) return adapted;
  const double rate = alpha / static_cast<double>(support.size());
  for (int s = 0; s < steps; ++s) {
    ad::GradStore g = adapted.zeros_like();
    for (std::size_t i : support) obj.loss_and_grad(adapted, i, g);
    ad::axpy(-rate, g, adapted);
  }
  return adapted;
}

StepStats meta_gradient(const ad::ParamSet& theta, const Objective& obj, std::span<const Task> tasks,
                        const MetaConfig& cfg, ad::GradStore& grad) {
  grad = theta.zeros_like();
  StepStats stats;
  for (const Task& task : tasks) {
    // First order: the test gradient at theta' is applied to theta as is.
    if (cfg.alpha == 0.0 || task.support.empty()) {
      stats.loss += obj.loss_and_grad(theta, task.test, grad);
    } else {
      ad::ParamSet adapted = inner_update(theta, obj, task.support, cfg.alpha, cfg.inner_steps);
      stats.loss += obj.loss_and_grad(adapted, task.test, grad);
    }
  }
  if (cfg.average_batch && !tasks.empty()) ad::scale(grad, 1.0 / static_cast<double>(tasks.size()));
  stats.grad_norm = ad::global_norm(grad);
  return stats;
}

namespace {

void require_finite(const ad::GradStore& g, double norm, const char* what) {
  if (std::isfinite(norm)) return;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g[i].all_finite()) {
      throw ad::NonFiniteError(std::string(what) + ": non-finite gradient in " + g.name(i));
    }
  }
  throw ad::NonFiniteError(std::string(what) + ": gradient norm overflowed");
}

} // namespace

StepStats meta_batch_step(ad::ParamSet& theta, const Objective& obj, std::span<const Task> tasks,
                          const MetaConfig& cfg, ad::AdagradState& state, std::mt19937_64& noise_rng) {
  if (tasks.empty()) throw std::invalid_argument("meta_batch_step: empty task batch");
  ad::GradStore g;
  StepStats stats = meta_gradient(theta, obj, tasks, cfg, g);
  require_finite(g, stats.grad_norm, "meta_batch_step");
  ad::OptimConfig oc = cfg.optim;
  oc.learning_rate = cfg.beta;
  ad::optimizer_step(theta, g, state, oc, noise_rng);
  return stats;
}

StepStats baseline_step(ad::ParamSet& theta, const Objective& obj, std::span<const std::size_t> batch,
                        const MetaConfig& cfg, ad::AdagradState& state, std::mt19937_64& noise_rng) {
  if (batch.empty()) throw std::invalid_argument("baseline_step: empty batch");
  ad::GradStore g = theta.zeros_like();
  StepStats stats;
  for (std::size_t i : batch) stats.loss += obj.loss_and_grad(theta, i, g);
  if (cfg.average_batch) ad::scale(g, 1.0 / static_cast<double>(batch.size()));
  stats.grad_norm = ad::global_norm(g);
  require_finite(g, stats.grad_norm, "baseline_step");
  ad::optimizer_step(theta, g, state, cfg.optim, noise_rng);
  return stats;
}

} // namespace ptmaml::meta
