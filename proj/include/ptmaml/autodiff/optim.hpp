#pragma once

#include <cstdint>
#include <random>

#include "ptmaml/autodiff/tensor.hpp"

namespace ptmaml::ad {

struct OptimConfig {
  double learning_rate = 0.1;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
  double noise_eta = 0.3;
  double noise_gamma = 0.55;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on non-finite values or clip_norm <= 0.
  void validate() const;
};

struct AdagradState {
  GradStore accumulators;
  std::uint64_t step_count = 0;

  static AdagradState fresh(const ParamSet& params) { return {params.zeros_like(), 0}; }
};

/// Rescales all gradients by clip_norm / g when the global norm g exceeds
/// clip_norm. Returns the norm before clipping.
double clip_gradients_inplace(GradStore& grads, double clip_norm);
GradStore clip_gradients(GradStore grads, double clip_norm);

/// Variance of the annealed gradient noise at optimizer step t:
/// eta / (1 + t)^gamma.
double noise_variance(std::uint64_t t, const OptimConfig& cfg);

void add_gradient_noise_inplace(GradStore& grads, std::uint64_t t, const OptimConfig& cfg,
                                std::mt19937_64& rng);
GradStore add_gradient_noise(GradStore grads, std::uint64_t t, const OptimConfig& cfg,
                             std::mt19937_64& rng);

/// acc += g^2; p -= lr * g / (sqrt(acc) + eps); step_count += 1.
void adagrad_step(ParamSet& params, const GradStore& grads, AdagradState& state,
                  const OptimConfig& cfg);

/// The full update used by every trainer: clip, then noise at the state's
/// step index, then Adagrad. Mutates `grads`.
void optimizer_step(ParamSet& params, GradStore& grads, AdagradState& state,
                    const OptimConfig& cfg, std::mt19937_64& noise_rng);

} // namespace ptmaml::ad
