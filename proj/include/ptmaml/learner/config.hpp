#pragma once

#include <string>
#include <string_view>

namespace ptmaml::learner {

enum class LossKind { Pointer, Max, Sum };
enum class CellKind { Gru, Lstm };

std::string_view loss_name(LossKind k);  // "pointer", "max", "sum"
LossKind loss_from_name(std::string_view name);
std::string_view cell_name(CellKind k);
CellKind cell_from_name(std::string_view name);

struct LearnerConfig {
  int embed_dim = 32;
  int hidden_dim = 64;
  int encoder_layers = 1;
  int decoder_layers = 1;
  CellKind cell = CellKind::Gru;
  LossKind loss = LossKind::Sum;
  int max_decode_len = 40;

  void validate() const;
};

} // namespace ptmaml::learner
