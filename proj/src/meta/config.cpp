#include "ptmaml/meta/config.hpp"

#include <cmath>
#include <stdexcept>

namespace ptmaml::meta {

void MetaConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and nonnegative");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  if (inner_steps <= 0 || task_batch <= 0 || epochs <= 0) {
    throw std::invalid_argument("inner_steps, task_batch and epochs must be positive");
  }
  if (!first_order) throw std::invalid_argument("only first-order meta-gradients are supported");
  optim.validate();
}

} // namespace ptmaml::meta
