#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "suites.hpp"
#include "ttita/error.hpp"
#include "ttita/ops.hpp"

namespace {

using namespace ttita;

std::vector<real> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(Tensor, ShapeInvariants) {
  const Tensor t = Tensor::zeros({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor::zeros({0, 3}), ShapeError);
}

TEST(Tensor, BackwardNeedsScalar) {
  Tensor x = Tensor::from({3}, {1, 2, 3}, true);
  EXPECT_THROW(ops::square(x).backward(), ShapeError);
}

TEST(Tensor, SumOfSquaresGradient) {
  Tensor x = Tensor::from({3}, {1, 2, 3}, true);
  ops::sum(ops::square(x)).backward();
  EXPECT_EQ(std::vector<real>(x.grad().begin(), x.grad().end()), (std::vector<real>{2, 4, 6}));
}

TEST(Tensor, SumGradientIsOnes) {
  Tensor x = Tensor::from({2, 2}, {-3, 0.5, 9, 2}, true);
  ops::sum(x).backward();
  for (real g : x.grad()) EXPECT_EQ(g, 1);
}

TEST(Tensor, GradientsAccumulateAcrossUses) {
  Tensor x = Tensor::from({2}, {1, -2}, true);
  // x*x + x: d/dx = 2x + 1
  ops::sum(ops::add(ops::multiply(x, x), x)).backward();
  EXPECT_FLOAT_EQ(x.grad()[0], 3);
  EXPECT_FLOAT_EQ(x.grad()[1], -3);
}

TEST(Tensor, NoGradGuardBuildsNoGraph) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  NoGradGuard guard;
  const Tensor y = ops::square(x);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Ops, MatmulIdentity) {
  const Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor i = Tensor::from({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(values(ops::matmul(a, i)), values(a));
}

TEST(Ops, MatmulByHand) {
  const Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::from({3, 1}, {1, 0, -1});
  EXPECT_EQ(values(ops::matmul(a, b)), (std::vector<real>{-2, -2}));
}

TEST(Ops, ShapeErrorsNameTheOp) {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  try {
    ops::matmul(a, b);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[2,3]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ops::add(a, Tensor::zeros({3, 2})), ShapeError);
}

TEST(Ops, Silu) {
  const Tensor y = ops::silu(Tensor::from({3}, {0, 1, -40}));
  EXPECT_EQ(y.at(0), 0);
  EXPECT_NEAR(y.at(1), 1 / (1 + std::exp(-1.0)), 1e-6);
  EXPECT_NEAR(y.at(1), 0.7311, 1e-4);
  EXPECT_NEAR(y.at(2), 0, 1e-12);
}

TEST(Ops, SoftmaxSingleton) {
  EXPECT_EQ(ops::softmax_lastdim(Tensor::from({1}, {5})).at(0), 1);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  const Tensor y = ops::softmax_lastdim(Tensor::from({2, 3}, {1, 2, 3, -1, 0, 1000}));
  EXPECT_NEAR(y.at(0) + y.at(1) + y.at(2), 1, 1e-6);
  EXPECT_NEAR(y.at(5), 1, 1e-6);
  EXPECT_NEAR(y.at(1) / y.at(0), std::numbers::e, 1e-4);
}

TEST(Ops, RmsnormByHand) {
  const Tensor y = ops::rmsnorm(Tensor::from({1, 2}, {3, 4}), Tensor::from({2}, {1, 1}));
  EXPECT_NEAR(y.at(0), 0.8485, 1e-4);
  EXPECT_NEAR(y.at(1), 1.1314, 1e-4);
}

TEST(Ops, RmsnormZerosAndScale) {
  const Tensor g = Tensor::from({3}, {0.5, 2, -1});
  EXPECT_EQ(values(ops::rmsnorm(Tensor::zeros({1, 3}), g)), (std::vector<real>{0, 0, 0}));
  const auto a = values(ops::rmsnorm(Tensor::from({1, 3}, {1, -2, 3}), g));
  const auto b = values(ops::rmsnorm(Tensor::from({1, 3}, {7, -14, 21}), g));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-5);
}

TEST(Ops, DropoutIdentityCases) {
  Rng rng(1);
  const Tensor x = Tensor::from({4}, {1, 2, 3, 4});
  EXPECT_EQ(values(ops::dropout(x, 0.0, rng, true)), values(x));
  EXPECT_EQ(values(ops::dropout(x, 0.5, rng, false)), values(x));
  EXPECT_THROW(ops::dropout(x, 1.0, rng, true), ConfigError);
}

TEST(Ops, DropoutInvertedScaling) {
  Rng rng(2);
  const Tensor y = ops::dropout(Tensor::full({20000}, 1), 0.25, rng, true);
  double total = 0;
  for (real v : y.data()) {
    EXPECT_TRUE(v == 0 || std::abs(v - real(1 / 0.75)) < 1e-6);
    total += v;
  }
  EXPECT_NEAR(total / 20000, 1.0, 0.02);
}

TEST(Ops, AddDistributesGradient) {
  Tensor a = Tensor::from({2}, {1, 2}, true), b = Tensor::from({2}, {3, 4}, true);
  support::project(ops::add(a, b), 3).backward();
  for (int i = 0; i < 2; ++i) EXPECT_EQ(a.grad()[i], b.grad()[i]);
}

TEST(Ops, ConcatSplitsGradientBySegment) {
  Tensor a = Tensor::from({1, 2}, {1, 2}, true), b = Tensor::from({1, 3}, {3, 4, 5}, true);
  const Tensor w = Tensor::from({1, 5}, {10, 20, 30, 40, 50});
  ops::sum(ops::multiply(ops::concat({a, b}), w)).backward();
  EXPECT_EQ(a.grad()[0], 10);
  EXPECT_EQ(a.grad()[1], 20);
  EXPECT_EQ(b.grad()[0], 30);
  EXPECT_EQ(b.grad()[2], 50);
}

TEST(Ops, SliceAndReshape) {
  const Tensor x = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(values(ops::slice(x, 1, 3)), (std::vector<real>{2, 3, 5, 6}));
  EXPECT_EQ(ops::reshape(x, {3, 2}).shape(), (Shape{3, 2}));
  EXPECT_THROW(ops::reshape(x, {4, 2}), ShapeError);
}

TEST(Ops, MeanSumLog) {
  const Tensor x = Tensor::from({4}, {1, 2, 3, 4});
  EXPECT_EQ(ops::mean(x).item(), 2.5);
  EXPECT_EQ(ops::sum(x).item(), 10);
  EXPECT_NEAR(ops::log(x).at(3), std::log(4.0), 1e-6);
}

TEST(Ops, EmbeddingLookupRangeCheck) {
  const Tensor t = Tensor::from({2, 2}, {1, 2, 3, 4});
  const std::vector<int> ok{1, 0}, bad{2};
  EXPECT_EQ(values(ops::embedding_lookup(t, ok)), (std::vector<real>{3, 4, 1, 2}));
  EXPECT_THROW(ops::embedding_lookup(t, bad), ShapeError);
}

TEST(Rope, PositionZeroIsIdentity) {
  const Tensor x = Tensor::from({1, 4}, {0.3, -1, 2, 5});
  EXPECT_EQ(values(ops::rope(x, 1, 1)), values(x));
}

TEST(Rope, RotatesPairByHand) {
  // Row 1 of a length-2 sequence is position 1.
  const Tensor x = Tensor::from({2, 2}, {1, 0, 1, 0});
  const Tensor y = ops::rope(x, 2, 1);
  EXPECT_NEAR(y.at(2), std::cos(1.0), 1e-6);
  EXPECT_NEAR(y.at(3), std::sin(1.0), 1e-6);
  EXPECT_NEAR(y.at(2), 0.5403, 1e-4);
  EXPECT_NEAR(y.at(3), 0.8415, 1e-4);
}

TEST(Rope, SecondPairUsesSlowerFrequency) {
  // head_dim 4: pair 1 angle = pos * 10000^(-2/4) = pos / 100.
  const Tensor x = Tensor::from({4, 4}, {0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0});
  const Tensor y = ops::rope(x, 4, 1);
  EXPECT_NEAR(y.at(3 * 4 + 2), std::cos(0.03), 1e-6);
  EXPECT_NEAR(y.at(3 * 4 + 3), std::sin(0.03), 1e-6);
}

TEST(Rope, PreservesNormAndRelativePosition) {
  Rng rng(8);
  const Tensor q = support::random_tensor({5, 6}, rng), k = support::random_tensor({5, 6}, rng);
  const Tensor rq = ops::rope(q, 5, 1);
  for (std::size_t r = 0; r < 5; ++r) {
    double a = 0, b = 0;
    for (std::size_t c = 0; c < 6; ++c) {
      a += q.at(r * 6 + c) * q.at(r * 6 + c);
      b += rq.at(r * 6 + c) * rq.at(r * 6 + c);
    }
    EXPECT_NEAR(a, b, 1e-5);
  }
  // Same vectors placed at positions (0,2) and (2,4): equal dot products.
  std::vector<real> qs(30, 0), ks(30, 0);
  for (std::size_t c = 0; c < 6; ++c) {
    qs[0 * 6 + c] = qs[2 * 6 + c] = q.at(c);
    ks[2 * 6 + c] = ks[4 * 6 + c] = k.at(c);
  }
  const Tensor a = ops::rope(Tensor::from({5, 6}, qs), 5, 1), b = ops::rope(Tensor::from({5, 6}, ks), 5, 1);
  double d02 = 0, d24 = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    d02 += a.at(0 * 6 + c) * b.at(2 * 6 + c);
    d24 += a.at(2 * 6 + c) * b.at(4 * 6 + c);
  }
  EXPECT_NEAR(d02, d24, 1e-5);
}

TEST(Rope, OddHeadWidthThrows) { EXPECT_THROW(ops::rope(Tensor::zeros({2, 6}), 2, 2), ShapeError); }

TEST(Attention, CausalWeightsAreLowerTriangular) {
  Rng rng(3);
  const Tensor q = support::random_tensor({4, 4}, rng), k = support::random_tensor({4, 4}, rng),
               v = support::random_tensor({4, 4}, rng);
  ops::AttentionWeights w;
  ops::attention(q, k, v, 1, 2, true, &w);
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < 4; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        if (j > i) EXPECT_EQ(w.at(0, h, i, j), 0);
        row += w.at(0, h, i, j);
      }
      EXPECT_NEAR(row, 1, 1e-6);
    }
  EXPECT_EQ(w.at(0, 0, 0, 0), 1);
}

TEST(Attention, SingleKeyWeightIsExactlyOne) {
  Rng rng(4);
  const Tensor q = support::random_tensor({3, 4}, rng), k = support::random_tensor({1, 4}, rng),
               v = support::random_tensor({1, 4}, rng);
  ops::AttentionWeights w;
  const Tensor out = ops::attention(q, k, v, 1, 2, false, &w);
  for (real p : w.values) EXPECT_EQ(p, 1);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.at(r * 4 + c), v.at(c));
}

TEST(Attention, MatchesDirectFormula) {
  Rng rng(5);
  const Tensor q = support::random_tensor({2, 2}, rng), k = support::random_tensor({3, 2}, rng),
               v = support::random_tensor({3, 2}, rng);
  const Tensor out = ops::attention(q, k, v, 1, 1, false);
  for (std::size_t i = 0; i < 2; ++i) {
    double logits[3], total = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      logits[j] = std::exp((q.at(i * 2) * k.at(j * 2) + q.at(i * 2 + 1) * k.at(j * 2 + 1)) / std::sqrt(2.0));
      total += logits[j];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double expect = 0;
      for (std::size_t j = 0; j < 3; ++j) expect += logits[j] / total * v.at(j * 2 + c);
      EXPECT_NEAR(out.at(i * 2 + c), expect, 1e-6);
    }
  }
}

TEST(CrossEntropy, IgnoresNegativeTargetsAndAverages) {
  const Tensor logits = Tensor::from({3, 2}, {0, 0, 5, -5, 1, 1});
  const std::vector<int> t{0, -1, 1};
  EXPECT_NEAR(ops::cross_entropy(logits, t).item(), std::log(2.0), 1e-6);
  const std::vector<int> none{-1, -1, -1};
  EXPECT_EQ(ops::cross_entropy(logits, none).item(), 0);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const Tensor logits = Tensor::full({4, 11}, 0.37f);
  const std::vector<int> t{0, 3, 10, 7};
  EXPECT_NEAR(ops::cross_entropy(logits, t).item(), std::log(11.0), 1e-6);
}

}  // namespace
