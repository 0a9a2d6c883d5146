#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ttita/benchmark.hpp"
#include "ttita/error.hpp"
#include "ttita/synthetic.hpp"

namespace {

using namespace ttita;

TEST(Benchmark, ParseMethods) {
  EXPECT_EQ(parse_methods("mode,knn"), (std::vector<std::string>{"mode", "knn"}));
  EXPECT_EQ(parse_methods(" ttita , ttita-mtl"), (std::vector<std::string>{"ttita", "ttita-mtl"}));
  EXPECT_THROW(parse_methods("mode,forest"), ConfigError);
  EXPECT_THROW(parse_methods(""), ConfigError);
  EXPECT_EQ(benchmark_methods().size(), 5u);
}

TEST(Benchmark, SplitSizesAndOneRowPerMethod) {
  const auto t = synthetic::toy(200, 1);
  const Dataset raw = from_table(t.csv, t.schema);
  BenchmarkOptions opts;
  opts.methods = {"mode", "knn"};
  const auto report = run_benchmark(raw, support::tiny_hp(), opts);
  EXPECT_EQ(report.test_rows, 20u);
  EXPECT_EQ(report.valid_rows, 18u);
  EXPECT_EQ(report.train_rows, 162u);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].method, "mode");
  EXPECT_EQ(report.rows[1].method, "knn");
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.scores.n_pairs, 20u);
    EXPECT_GE(r.inference_seconds, 0.0);
  }
  // The toy target is a function of the inputs, so the neighbour wins.
  EXPECT_GT(report.rows[1].scores.rouge1_f1, report.rows[0].scores.rouge1_f1);
  const auto j = report.to_json();
  EXPECT_EQ(j.at("methods").size(), 2u);
  EXPECT_NE(report.table().find("knn"), std::string::npos);
}

TEST(Benchmark, LearnedMethodsReportTimings) {
  const auto t = synthetic::toy(60, 2);
  const Dataset raw = from_table(t.csv, t.schema);
  auto hp = support::tiny_hp();
  hp.mtl_targets.clear();
  hp.epochs = 1;
  BenchmarkOptions opts;
  opts.methods = {"decoder", "ttita-mtl"};
  const auto report = run_benchmark(raw, hp, opts);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& r : report.rows) {
    EXPECT_GT(r.train_seconds, 0.0);
    EXPECT_GT(r.inference_seconds, 0.0);
  }
}

}  // namespace
