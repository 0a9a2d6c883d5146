#pragma once

// Brute-force versions of the two non-learned baselines.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ttita::support {

inline std::string ref_mode(std::span<const std::optional<std::string>> values) {
  std::string best;
  std::size_t best_n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    std::size_t n = 0;
    for (const auto& w : values) n += (w && *w == *v);
    if (n > best_n || (n == best_n && *v < best)) {
      best = *v;
      best_n = n;
    }
  }
  return best;
}

/// Index of the first row at minimal squared distance.
inline std::size_t ref_nearest(const std::vector<std::vector<double>>& rows, const std::vector<double>& q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double d = 0;
    for (std::size_t k = 0; k < q.size(); ++k) d += (rows[r][k] - q[k]) * (rows[r][k] - q[k]);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

}  // namespace ttita::support
