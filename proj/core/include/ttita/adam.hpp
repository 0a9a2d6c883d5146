#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttita/tensor.hpp"

namespace ttita {

/// Adam with bias correction (Kingma & Ba). Moment buffers are created
/// lazily on the first step and keyed by parameter position, so the same
/// parameter list must be passed on every step.
struct AdamState {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  std::vector<std::vector<real>> first_moment;
  std::vector<std::vector<real>> second_moment;
};

/// One update of every parameter from its gradient; zeroes gradients after.
/// Throws ConfigError when a parameter has no gradient buffer.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace ttita
