#include "ptmaml/learner/config.hpp"

#include <stdexcept>
#include <string>

namespace ptmaml::learner {

std::string_view loss_name(LossKind k) {
  switch (k) {
    case LossKind::Pointer: return "pointer";
    case LossKind::Max: return "max";
    case LossKind::Sum: return "sum";
  }
  return "?";
}

LossKind loss_from_name(std::string_view name) {
  for (LossKind k : {LossKind::Pointer, LossKind::Max, LossKind::Sum}) {
    if (loss_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown loss kind '" + std::string(name) + "' (pointer|max|sum)");
}

std::string_view cell_name(CellKind k) { return k == CellKind::Gru ? "gru" : "lstm"; }

CellKind cell_from_name(std::string_view name) {
  if (name == "gru") return CellKind::Gru;
  if (name == "lstm") return CellKind::Lstm;
  throw std::invalid_argument("unknown cell '" + std::string(name) + "' (gru|lstm)");
}

void LearnerConfig::validate() const {
  if (embed_dim <= 0 || hidden_dim <= 0 || encoder_layers <= 0 || decoder_layers <= 0 || max_decode_len <= 0) {
    throw std::invalid_argument("learner dimensions and max_decode_len must be positive");
  }
}

} // namespace ptmaml::learner
