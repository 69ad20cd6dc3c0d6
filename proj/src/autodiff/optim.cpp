#include "ptmaml/autodiff/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ptmaml::ad {

void OptimConfig::validate() const {
  for (double v : {learning_rate, epsilon, clip_norm, noise_eta, noise_gamma}) {
    if (!std::isfinite(v)) throw std::invalid_argument("optimizer settings must be finite");
  }
  if (clip_norm <= 0.0) throw std::invalid_argument("clip_norm must be positive");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (noise_eta < 0.0 || noise_gamma < 0.0) {
    throw std::invalid_argument("noise parameters must be nonnegative");
  }
}

double clip_gradients_inplace(GradStore& grads, double clip_norm) {
  if (clip_norm <= 0.0) throw std::invalid_argument("clip_norm must be positive");
  double norm = global_norm(grads);
  if (norm > clip_norm) scale(grads, clip_norm / norm);
  return norm;
}

GradStore clip_gradients(GradStore grads, double clip_norm) {
  clip_gradients_inplace(grads, clip_norm);
  return grads;
}

double noise_variance(std::uint64_t t, const OptimConfig& cfg) {
  return cfg.noise_eta / std::pow(1.0 + static_cast<double>(t), cfg.noise_gamma);
}

void add_gradient_noise_inplace(GradStore& grads, std::uint64_t t, const OptimConfig& cfg,
                                std::mt19937_64& rng) {
  if (cfg.noise_eta == 0.0) return;
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance(t, cfg)));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    for (double& v : grads[i].values()) v += normal(rng);
  }
}

GradStore add_gradient_noise(GradStore grads, std::uint64_t t, const OptimConfig& cfg,
                             std::mt19937_64& rng) {
  add_gradient_noise_inplace(grads, t, cfg, rng);
  return grads;
}

void adagrad_step(ParamSet& params, const GradStore& grads, AdagradState& state,
                  const OptimConfig& cfg) {
  if (!params.same_layout(grads) || !params.same_layout(state.accumulators)) {
    throw ShapeError("adagrad_step: parameter, gradient and state layouts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    auto g = grads[i].values();
    auto acc = state.accumulators[i].values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc[k] += g[k] * g[k];
      p[k] -= cfg.learning_rate * g[k] / (std::sqrt(acc[k]) + cfg.epsilon);
    }
  }
  ++state.step_count;
}

void optimizer_step(ParamSet& params, GradStore& grads, AdagradState& state,
                    const OptimConfig& cfg, std::mt19937_64& noise_rng) {
  clip_gradients_inplace(grads, cfg.clip_norm);
  add_gradient_noise_inplace(grads, state.step_count, cfg, noise_rng);
  adagrad_step(params, grads, state, cfg);
}

} // namespace ptmaml::ad
