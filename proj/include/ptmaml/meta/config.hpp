#pragma once

#include "ptmaml/autodiff/optim.hpp"

namespace ptmaml::meta {

struct MetaConfig {
  double alpha = 0.001;  // inner step size
  double beta = 0.1;     // meta step size (Adagrad rate of the meta update)
  int k = 2;             // support size
  int inner_steps = 1;
  int task_batch = 16;
  int epochs = 30;
  ad::OptimConfig optim;  // optim.learning_rate drives the baseline trainer
  bool first_order = true;
  bool average_batch = false;  // mean instead of sum over the task batch

  /// Throws std::invalid_argument; second-order mode is not supported.
  void validate() const;
};

} // namespace ptmaml::meta
