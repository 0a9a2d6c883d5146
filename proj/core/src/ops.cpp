#include "ttita/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ttita/error.hpp"

namespace ttita::ops {

namespace {

using Mat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using Strided = Eigen::OuterStride<>;
using HeadMap = Eigen::Map<Mat, 0, Strided>;
using ConstHeadMap = Eigen::Map<const Mat, 0, Strided>;

MatMap view(std::vector<real>& v, std::size_t r, std::size_t c) {
  return MatMap(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

detail::Node& parent(detail::Node& self, std::size_t i) { return *self.parents[i]; }

bool wants_grad(const detail::Node& n) { return n.requires_grad; }

enum class Broadcast { same, row };

Broadcast check_binary(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::same;
  if (b.rank() == 1 && b.dim(0) == a.cols()) return Broadcast::row;
  throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()) + " do not conform");
}

real sigmoid_of(real x) { return real(1) / (real(1) + std::exp(-x)); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + to_string(a.shape()) + " by " +
                     to_string(b.shape()) + " (inner dims must agree)");
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<real> out(m * n);
  view(out, m, n).noalias() = view(a.node()->data, m, k) * view(b.node()->data, k, n);
  return Tensor::make({m, n}, std::move(out), "matmul", {a, b}, [m, k, n](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    auto dc = view(self.grad, m, n);
    if (wants_grad(pa)) view(pa.ensure_grad(), m, k).noalias() += dc * view(pb.data, k, n).transpose();
    if (wants_grad(pb)) view(pb.ensure_grad(), k, n).noalias() += view(pa.data, m, k).transpose() * dc;
  });
}

namespace {

Tensor add_like(const char* op, const Tensor& a, const Tensor& b, real sign) {
  const auto mode = check_binary(op, a, b);
  const std::size_t cols = a.cols(), rows = a.rows();
  std::vector<real> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  if (mode == Broadcast::same) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * bd[i];
  } else {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += sign * bd[c];
  }
  return Tensor::make(a.shape(), std::move(out), op, {a, b}, [mode, rows, cols, sign](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    const auto& g = self.grad;
    if (wants_grad(pa)) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (wants_grad(pb)) {
      auto& gb = pb.ensure_grad();
      if (mode == Broadcast::same) {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
      } else {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gb[c] += sign * g[r * cols + c];
      }
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_like("add", a, b, real(1)); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_like("sub", a, b, real(-1)); }

Tensor multiply(const Tensor& a, const Tensor& b) {
  const auto mode = check_binary("multiply", a, b);
  const std::size_t cols = a.cols(), rows = a.rows();
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<real> out(a.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out[i] = ad[i] * bd[mode == Broadcast::same ? i : c];
    }
  return Tensor::make(a.shape(), std::move(out), "multiply", {a, b}, [mode, rows, cols](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    const auto& g = self.grad;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        const std::size_t j = mode == Broadcast::same ? i : c;
        if (wants_grad(pa)) pa.ensure_grad()[i] += g[i] * pb.data[j];
        if (wants_grad(pb)) pb.ensure_grad()[j] += g[i] * pa.data[i];
      }
  });
}

Tensor scale(const Tensor& a, real factor) {
  std::vector<real> out(a.data().begin(), a.data().end());
  for (auto& x : out) x *= factor;
  return Tensor::make(a.shape(), std::move(out), "scale", {a}, [factor](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& ga = pa.ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const std::size_t rows = parts.front().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat: row count " + std::to_string(p.rows()) + " of input " +
                       to_string(p.shape()) + " differs from " + std::to_string(rows));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<real> out(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto d = p.data();
    const std::size_t w = p.cols();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(d.begin() + r * w, w, out.begin() + r * total + offset);
    offset += w;
  }
  Shape shape = parts.front().shape();
  shape.back() = total;
  return Tensor::make(std::move(shape), std::move(out), "concat", parts,
                      [rows, total, widths = std::move(widths)](detail::Node& self) {
                        std::size_t off = 0;
                        for (std::size_t i = 0; i < widths.size(); ++i) {
                          auto& p = parent(self, i);
                          const std::size_t w = widths[i];
                          if (wants_grad(p)) {
                            auto& g = p.ensure_grad();
                            for (std::size_t r = 0; r < rows; ++r)
                              for (std::size_t c = 0; c < w; ++c)
                                g[r * w + c] += self.grad[r * total + off + c];
                          }
                          off += w;
                        }
                      });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  if (table.rank() != 2) {
    throw ShapeError("embedding_lookup: table must be rank 2, got " + to_string(table.shape()));
  }
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<int> idx(ids.begin(), ids.end());
  for (int id : idx) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw ShapeError("embedding_lookup: id " + std::to_string(id) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
  }
  std::vector<real> out(idx.size() * width);
  const auto td = table.data();
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(td.begin() + static_cast<std::size_t>(idx[r]) * width, width, out.begin() + r * width);
  Shape shape{idx.size(), width};
  return Tensor::make(std::move(shape), std::move(out), "embedding_lookup", {table},
                      [idx = std::move(idx), width](detail::Node& self) {
                        auto& g = parent(self, 0).ensure_grad();
                        for (std::size_t r = 0; r < idx.size(); ++r) {
                          const std::size_t base = static_cast<std::size_t>(idx[r]) * width;
                          for (std::size_t c = 0; c < width; ++c) g[base + c] += self.grad[r * width + c];
                        }
                      });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ShapeError("gather_rows: empty index list");
  const std::size_t rows = x.rows(), width = x.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  for (auto i : idx) {
    if (i >= rows) {
      throw ShapeError("gather_rows: row " + std::to_string(i) + " outside " + to_string(x.shape()));
    }
  }
  std::vector<real> out(idx.size() * width);
  const auto xd = x.data();
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(xd.begin() + idx[r] * width, width, out.begin() + r * width);
  Shape shape{idx.size(), width};
  return Tensor::make(std::move(shape), std::move(out), "gather_rows", {x},
                      [idx = std::move(idx), width](detail::Node& self) {
                        auto& g = parent(self, 0).ensure_grad();
                        for (std::size_t r = 0; r < idx.size(); ++r)
                          for (std::size_t c = 0; c < width; ++c)
                            g[idx[r] * width + c] += self.grad[r * width + c];
                      });
}

Tensor softmax_lastdim(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const real* in = xd.data() + r * cols;
    real* o = out.data() + r * cols;
    const real mx = *std::max_element(in, in + cols);
    real total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return Tensor::make(x.shape(), std::move(out), "softmax_lastdim", {x}, [rows, cols](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const real* y = self.data.data() + r * cols;
      const real* dy = self.grad.data() + r * cols;
      real dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += y[c] * dy[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += y[c] * (dy[c] - dot);
    }
  });
}

Tensor silu(const Tensor& x) {
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * sigmoid_of(xd[i]);
  return Tensor::make(x.shape(), std::move(out), "silu", {x}, [](detail::Node& self) {
    auto& p = parent(self, 0);
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const real s = sigmoid_of(p.data[i]);
      g[i] += self.grad[i] * s * (real(1) + p.data[i] * (real(1) - s));
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_of(xd[i]);
  return Tensor::make(x.shape(), std::move(out), "sigmoid", {x}, [](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.data[i] * (real(1) - self.data[i]);
  });
}

Tensor rmsnorm(const Tensor& x, const Tensor& gain, real eps) {
  if (gain.rank() != 1 || gain.dim(0) != x.cols()) {
    throw ShapeError("rmsnorm: gain " + to_string(gain.shape()) + " does not match last dim of " +
                     to_string(x.shape()));
  }
  const std::size_t rows = x.rows(), cols = x.cols();
  const auto xd = x.data();
  const auto gd = gain.data();
  std::vector<real> inv_rms(rows);
  std::vector<real> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const real* in = xd.data() + r * cols;
    real ms = 0;
    for (std::size_t c = 0; c < cols; ++c) ms += in[c] * in[c];
    ms /= static_cast<real>(cols);
    inv_rms[r] = real(1) / std::sqrt(ms + eps);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = gd[c] * in[c] * inv_rms[r];
  }
  return Tensor::make(x.shape(), std::move(out), "rmsnorm", {x, gain},
                      [rows, cols, inv_rms = std::move(inv_rms)](detail::Node& self) {
                        auto& px = parent(self, 0);
                        auto& pg = parent(self, 1);
                        for (std::size_t r = 0; r < rows; ++r) {
                          const real* in = px.data.data() + r * cols;
                          const real* dy = self.grad.data() + r * cols;
                          const real s = inv_rms[r];
                          if (wants_grad(pg)) {
                            auto& gg = pg.ensure_grad();
                            for (std::size_t c = 0; c < cols; ++c) gg[c] += dy[c] * in[c] * s;
                          }
                          if (wants_grad(px)) {
                            auto& gx = px.ensure_grad();
                            real dot = 0;
                            for (std::size_t c = 0; c < cols; ++c) dot += pg.data[c] * dy[c] * in[c];
                            const real k = dot * s * s * s / static_cast<real>(cols);
                            for (std::size_t c = 0; c < cols; ++c)
                              gx[r * cols + c] += pg.data[c] * dy[c] * s - in[c] * k;
                          }
                        }
                      });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const real keep_scale = static_cast<real>(1.0 / (1.0 - rate));
  std::vector<real> mask(x.size());
  for (auto& m : mask) m = rng.uniform() < rate ? real(0) : keep_scale;
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * mask[i];
  return Tensor::make(x.shape(), std::move(out), "dropout", {x}, [mask = std::move(mask)](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<real> out(x.data().begin(), x.data().end());
  return Tensor::make(std::move(shape), std::move(out), "reshape", {x}, [](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor slice(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (begin >= end || end > cols) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for last dim of " + to_string(x.shape()));
  }
  const std::size_t w = end - begin;
  const auto xd = x.data();
  std::vector<real> out(rows * w);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(xd.begin() + r * cols + begin, w, out.begin() + r * w);
  Shape shape = x.shape();
  shape.back() = w;
  return Tensor::make(std::move(shape), std::move(out), "slice", {x}, [rows, cols, begin, w](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) g[r * cols + begin + c] += self.grad[r * w + c];
  });
}

Tensor sum(const Tensor& x) {
  double total = 0;
  for (real v : x.data()) total += v;
  return Tensor::make({1}, {static_cast<real>(total)}, "sum", {x}, [](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  double total = 0;
  for (real v : x.data()) total += v;
  const real n = static_cast<real>(x.size());
  return Tensor::make({1}, {static_cast<real>(total / x.size())}, "mean", {x}, [n](detail::Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0] / n;
  });
}

Tensor square(const Tensor& x) {
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * xd[i];
  return Tensor::make(x.shape(), std::move(out), "square", {x}, [](detail::Node& self) {
    auto& p = parent(self, 0);
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += real(2) * p.data[i] * self.grad[i];
  });
}

Tensor log(const Tensor& x) {
  const auto xd = x.data();
  std::vector<real> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(xd[i]);
  return Tensor::make(x.shape(), std::move(out), "log", {x}, [](detail::Node& self) {
    auto& p = parent(self, 0);
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / p.data[i];
  });
}

namespace {

struct RopeTable {
  std::vector<real> cos, sin;  // [seq_len, head_dim/2]
};

RopeTable rope_table(std::size_t seq_len, std::size_t head_dim) {
  const std::size_t half = head_dim / 2;
  RopeTable t{std::vector<real>(seq_len * half), std::vector<real>(seq_len * half)};
  for (std::size_t pos = 0; pos < seq_len; ++pos)
    for (std::size_t i = 0; i < half; ++i) {
      const double theta =
          static_cast<double>(pos) * std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(head_dim));
      t.cos[pos * half + i] = static_cast<real>(std::cos(theta));
      t.sin[pos * half + i] = static_cast<real>(std::sin(theta));
    }
  return t;
}

// Rotates each (2i, 2i+1) pair; `direction` -1 applies the inverse rotation.
void apply_rope(const real* in, real* out, std::size_t rows, std::size_t cols, std::size_t seq_len,
                std::size_t head_dim, const RopeTable& t, real direction, bool accumulate) {
  const std::size_t half = head_dim / 2;
  const std::size_t heads = cols / head_dim;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t pos = r % seq_len;
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t base = r * cols + h * head_dim;
      for (std::size_t i = 0; i < half; ++i) {
        const real c = t.cos[pos * half + i];
        const real s = direction * t.sin[pos * half + i];
        const real x0 = in[base + 2 * i], x1 = in[base + 2 * i + 1];
        const real y0 = x0 * c - x1 * s, y1 = x0 * s + x1 * c;
        if (accumulate) {
          out[base + 2 * i] += y0;
          out[base + 2 * i + 1] += y1;
        } else {
          out[base + 2 * i] = y0;
          out[base + 2 * i + 1] = y1;
        }
      }
    }
  }
}

}  // namespace

Tensor rope(const Tensor& x, std::size_t seq_len, std::size_t heads) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (heads == 0 || cols % heads != 0) {
    throw ShapeError("rope: width " + std::to_string(cols) + " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t head_dim = cols / heads;
  if (head_dim % 2 != 0) {
    throw ShapeError("rope: head dim " + std::to_string(head_dim) + " is odd; rotary encoding needs pairs");
  }
  if (seq_len == 0 || rows % seq_len != 0) {
    throw ShapeError("rope: " + std::to_string(rows) + " rows are not a multiple of seq_len " + std::to_string(seq_len));
  }
  auto table = std::make_shared<RopeTable>(rope_table(seq_len, head_dim));
  std::vector<real> out(x.size());
  apply_rope(x.data().data(), out.data(), rows, cols, seq_len, head_dim, *table, real(1), false);
  return Tensor::make(x.shape(), std::move(out), "rope", {x},
                      [rows, cols, seq_len, head_dim, table](detail::Node& self) {
                        auto& g = parent(self, 0).ensure_grad();
                        apply_rope(self.grad.data(), g.data(), rows, cols, seq_len, head_dim, *table, real(-1), true);
                      });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t batch, std::size_t heads,
                 bool causal, AttentionWeights* weights) {
  const std::size_t d = q.cols();
  if (k.cols() != d || v.cols() != d || k.shape() != v.shape()) {
    throw ShapeError("attention: q " + to_string(q.shape()) + ", k " + to_string(k.shape()) + ", v " +
                     to_string(v.shape()) + " do not conform");
  }
  if (batch == 0 || q.rows() % batch != 0 || k.rows() % batch != 0) {
    throw ShapeError("attention: rows of q " + to_string(q.shape()) + " / k " + to_string(k.shape()) +
                     " not divisible by batch " + std::to_string(batch));
  }
  if (heads == 0 || d % heads != 0) {
    throw ShapeError("attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t tq = q.rows() / batch, tk = k.rows() / batch, hd = d / heads;
  if (causal && tq != tk) {
    throw ShapeError("attention: causal mask needs equal query/key lengths, got " + std::to_string(tq) + " and " +
                     std::to_string(tk));
  }
  const real scale_factor = real(1) / std::sqrt(static_cast<real>(hd));
  const auto ei = [](std::size_t n) { return static_cast<Eigen::Index>(n); };

  auto probs = std::make_shared<std::vector<real>>(batch * heads * tq * tk);
  std::vector<real> out(q.size());
  const real* qd = q.data().data();
  const real* kd = k.data().data();
  const real* vd = v.data().data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h) {
      ConstHeadMap qh(qd + b * tq * d + h * hd, ei(tq), ei(hd), Strided(ei(d)));
      ConstHeadMap kh(kd + b * tk * d + h * hd, ei(tk), ei(hd), Strided(ei(d)));
      ConstHeadMap vh(vd + b * tk * d + h * hd, ei(tk), ei(hd), Strided(ei(d)));
      MatMap p(probs->data() + (b * heads + h) * tq * tk, ei(tq), ei(tk));
      p.noalias() = (qh * kh.transpose()) * scale_factor;
      for (std::size_t i = 0; i < tq; ++i) {
        real* row = p.data() + i * tk;
        const std::size_t visible = causal ? i + 1 : tk;
        for (std::size_t j = visible; j < tk; ++j) row[j] = -std::numeric_limits<real>::infinity();
        const real mx = *std::max_element(row, row + visible);
        real total = 0;
        for (std::size_t j = 0; j < tk; ++j) total += (row[j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < tk; ++j) row[j] /= total;
      }
      HeadMap oh(out.data() + b * tq * d + h * hd, ei(tq), ei(hd), Strided(ei(d)));
      oh.noalias() = p * vh;
    }
  if (weights != nullptr) {
    weights->batch = batch;
    weights->heads = heads;
    weights->queries = tq;
    weights->keys = tk;
    weights->values = *probs;
  }
  return Tensor::make(q.shape(), std::move(out), "attention", {q, k, v},
                      [=](detail::Node& self) {
                        auto& pq = parent(self, 0);
                        auto& pk = parent(self, 1);
                        auto& pv = parent(self, 2);
                        real* gq = wants_grad(pq) ? pq.ensure_grad().data() : nullptr;
                        real* gk = wants_grad(pk) ? pk.ensure_grad().data() : nullptr;
                        real* gv = wants_grad(pv) ? pv.ensure_grad().data() : nullptr;
                        Mat dp(ei(tq), ei(tk));
                        for (std::size_t b = 0; b < batch; ++b)
                          for (std::size_t h = 0; h < heads; ++h) {
                            const std::size_t qoff = b * tq * d + h * hd, koff = b * tk * d + h * hd;
                            ConstHeadMap qh(pq.data.data() + qoff, ei(tq), ei(hd), Strided(ei(d)));
                            ConstHeadMap kh(pk.data.data() + koff, ei(tk), ei(hd), Strided(ei(d)));
                            ConstHeadMap vh(pv.data.data() + koff, ei(tk), ei(hd), Strided(ei(d)));
                            ConstHeadMap go(self.grad.data() + qoff, ei(tq), ei(hd), Strided(ei(d)));
                            ConstMatMap p(probs->data() + (b * heads + h) * tq * tk, ei(tq), ei(tk));
                            if (gv) HeadMap(gv + koff, ei(tk), ei(hd), Strided(ei(d))).noalias() += p.transpose() * go;
                            if (!gq && !gk) continue;
                            dp.noalias() = go * vh.transpose();
                            for (Eigen::Index i = 0; i < ei(tq); ++i) {
                              const real dot = (dp.row(i).array() * p.row(i).array()).sum();
                              dp.row(i) = (p.row(i).array() * (dp.row(i).array() - dot)) * scale_factor;
                            }
                            if (gq) HeadMap(gq + qoff, ei(tq), ei(hd), Strided(ei(d))).noalias() += dp * kh;
                            if (gk) HeadMap(gk + koff, ei(tk), ei(hd), Strided(ei(d))).noalias() += dp.transpose() * qh;
                          }
                      });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  if (targets.size() != rows) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     to_string(logits.shape()));
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  const auto ld = logits.data();
  auto probs = std::make_shared<std::vector<real>>(logits.size());
  double total = 0;
  std::size_t counted = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (tgt[r] < 0) continue;
    if (static_cast<std::size_t>(tgt[r]) >= cols) {
      throw ShapeError("cross_entropy: target " + std::to_string(tgt[r]) + " outside " + std::to_string(cols) +
                       " classes");
    }
    const real* in = ld.data() + r * cols;
    real* p = probs->data() + r * cols;
    const real mx = *std::max_element(in, in + cols);
    double z = 0;
    for (std::size_t c = 0; c < cols; ++c) z += (p[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) p[c] = static_cast<real>(p[c] / z);
    total += std::log(z) - static_cast<double>(in[tgt[r]] - mx);
    ++counted;
  }
  const real loss = counted ? static_cast<real>(total / static_cast<double>(counted)) : real(0);
  return Tensor::make({1}, {loss}, "cross_entropy", {logits},
                      [rows, cols, counted, probs, tgt = std::move(tgt)](detail::Node& self) {
                        if (counted == 0) return;
                        auto& g = parent(self, 0).ensure_grad();
                        const real w = self.grad[0] / static_cast<real>(counted);
                        for (std::size_t r = 0; r < rows; ++r) {
                          if (tgt[r] < 0) continue;
                          const real* p = probs->data() + r * cols;
                          for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += w * p[c];
                          g[r * cols + static_cast<std::size_t>(tgt[r])] -= w;
                        }
                      });
}

}  // namespace ttita::ops
