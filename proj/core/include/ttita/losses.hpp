#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ttita/tensor.hpp"

namespace ttita {

// Plain-number forms of the training objectives. The model trains through
// the Tensor forms below; these evaluate the same formulas directly.

/// sum_i (y_i - yhat_i)^2 / N. Throws on N == 0 or length mismatch.
double loss_mse(std::span<const double> y, std::span<const double> y_hat);

/// -(1/N) sum_i sum_c p_ic log(phat_ic), with phat clamped below at 1e-9.
/// Rows are laid out row-major with `classes` columns.
double loss_ce_categorical(std::span<const double> p, std::span<const double> p_hat, std::size_t classes);

/// Mean NLL over non-pad target tokens. `logits` is [rows, vocab]; targets
/// with `mask` false are ignored. Returns 0 when nothing is counted.
double loss_ce_text(std::span<const int> targets, std::span<const double> logits, std::size_t vocab,
                    std::span<const bool> mask);

/// Unweighted sum of the present components.
struct LossComponents {
  std::optional<double> mse;
  std::optional<double> categorical;
  std::optional<double> text;
};
double loss_total(const LossComponents& parts);

/// Tensor form of the MSE between predictions [N,1] (or [N]) and `targets`.
Tensor mse_loss(const Tensor& predictions, std::span<const real> targets);

}  // namespace ttita
