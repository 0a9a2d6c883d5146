#include "ttita/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ttita/error.hpp"
#include "ttita/ops.hpp"

namespace ttita {

double loss_mse(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw ShapeError("loss_mse: lengths " + std::to_string(y.size()) + " and " + std::to_string(y_hat.size()) + " differ");
  if (y.empty()) throw ShapeError("loss_mse: no instances");
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) total += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return total / static_cast<double>(y.size());
}

double loss_ce_categorical(std::span<const double> p, std::span<const double> p_hat, std::size_t classes) {
  if (classes == 0 || p.size() != p_hat.size() || p.size() % classes != 0 || p.empty()) {
    throw ShapeError("loss_ce_categorical: shapes do not conform");
  }
  const std::size_t n = p.size() / classes;
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * std::log(std::max(p_hat[i], 1e-9));
  return -total / static_cast<double>(n);
}

double loss_ce_text(std::span<const int> targets, std::span<const double> logits, std::size_t vocab,
                    std::span<const bool> mask) {
  if (vocab == 0 || logits.size() != targets.size() * vocab || mask.size() != targets.size()) {
    throw ShapeError("loss_ce_text: shapes do not conform");
  }
  double total = 0;
  std::size_t m = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (!mask[r]) continue;
    const double* row = logits.data() + r * vocab;
    const double mx = *std::max_element(row, row + vocab);
    double z = 0;
    for (std::size_t c = 0; c < vocab; ++c) z += std::exp(row[c] - mx);
    total += std::log(z) + mx - row[targets[r]];
    ++m;
  }
  return m ? total / static_cast<double>(m) : 0.0;
}

double loss_total(const LossComponents& parts) {
  return parts.mse.value_or(0.0) + parts.categorical.value_or(0.0) + parts.text.value_or(0.0);
}

Tensor mse_loss(const Tensor& predictions, std::span<const real> targets) {
  if (predictions.size() != targets.size()) {
    throw ShapeError("mse_loss: " + std::to_string(targets.size()) + " targets for predictions " + to_string(predictions.shape()));
  }
  const Tensor y = Tensor::from(predictions.shape(), std::vector<real>(targets.begin(), targets.end()));
  return ops::mean(ops::square(ops::sub(predictions, y)));
}

}  // namespace ttita
