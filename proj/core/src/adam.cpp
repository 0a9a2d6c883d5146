#include "ttita/adam.hpp"

#include <cmath>
#include <string>

#include "ttita/error.hpp"

namespace ttita {

void adam_step(std::span<Tensor> params, AdamState& state) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw ConfigError("adam_step: parameter " + std::to_string(i) + " of shape " +
                        to_string(params[i].shape()) + " has no gradient");
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), real(0));
      state.second_moment.emplace_back(p.size(), real(0));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ConfigError("adam_step: optimizer tracks " + std::to_string(state.first_moment.size()) +
                      " parameters, got " + std::to_string(params.size()));
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const real b1 = static_cast<real>(state.beta1), b2 = static_cast<real>(state.beta2);
  const real step = static_cast<real>(state.learning_rate / c1);
  const real inv_sqrt_c2 = static_cast<real>(1.0 / std::sqrt(c2));
  const real eps = static_cast<real>(state.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_data();
    auto g = params[i].mutable_grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != w.size()) {
      throw ConfigError("adam_step: moment buffer size mismatch for parameter " + std::to_string(i));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (real(1) - b1) * g[j];
      v[j] = b2 * v[j] + (real(1) - b2) * g[j] * g[j];
      w[j] -= step * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
      g[j] = real(0);
    }
  }
}

}  // namespace ttita
