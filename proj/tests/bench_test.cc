// Copyright 2026 The BalanceKit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "balancekit/bench.h"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "balancekit/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace balancekit {
namespace {

using testing::CodeOf;

BenchSpec SmallSpec() {
  BenchSpec spec;
  spec.sizes = {6, 10, 14};
  spec.seeds = 5;
  spec.sparsity = 0.5;
  return spec;
}

TEST(BenchStatsTest, Median) {
  EXPECT_EQ(Median({3, 1, 2}), 2.0);
  EXPECT_EQ(Median({4, 1, 3, 2}), 2.5);
  EXPECT_TRUE(std::isnan(Median({})));
}

TEST(BenchStatsTest, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x = {1, 2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
  EXPECT_NEAR(LogLogSlope(x, y), 1.7, 1e-12);
}

TEST(BenchStatsTest, DistributionNames) {
  for (auto d : {EntryDistribution::kFoldedGaussian, EntryDistribution::kUniform}) {
    EXPECT_EQ(ParseDistribution(DistributionName(d)), d);
  }
  EXPECT_EQ(CodeOf([] { ParseDistribution("cauchy"); }),
            ErrorCode::kInvalidArgument);
}

TEST(RandomInstanceTest, ShapeAndMarginals) {
  std::mt19937_64 rng(90);
  for (int k = 0; k < 20; ++k) {
    const BalancingProblem prob =
        RandomInstance(8, 16, EntryDistribution::kUniform, 0.8, rng);
    EXPECT_EQ(prob.rows(), 8);
    EXPECT_EQ(prob.cols(), 16);
    EXPECT_GT(prob.a().RowSums().minCoeff(), 0.0);
    EXPECT_GT(prob.a().ColSums().minCoeff(), 0.0);
    EXPECT_LE(prob.p().maxCoeff(), 1.0);
    EXPECT_GT(prob.p().minCoeff(), 0.0);
    EXPECT_NEAR(prob.p().sum(), prob.q().sum(), 1e-12 * prob.p().sum());
  }
  std::mt19937_64 dense_rng(91);
  const BalancingProblem dense =
      RandomInstance(5, 10, EntryDistribution::kFoldedGaussian, 0.0, dense_rng);
  EXPECT_EQ(dense.a().nonzeros(), 50);
}

TEST(RunBenchTest, ReportLayout) {
  const BenchSpec spec = SmallSpec();
  const BenchReport report = RunBench(spec);
  EXPECT_EQ(report.records.size(), 2u * 3u * 5u);
  EXPECT_EQ(report.cells.size(), 6u);
  ASSERT_EQ(report.slopes.size(), 2u);
  for (const BenchRecord& r : report.records) {
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.m, 2 * r.n);
    EXPECT_GT(r.xi, 0.0);
    EXPECT_GT(r.fiedler, 0.0);
    EXPECT_GE(r.c_constant, 1.0);
  }
  for (const BenchCell& c : report.cells) EXPECT_EQ(c.samples, 5);
  for (const BenchSlope& s : report.slopes) EXPECT_TRUE(std::isfinite(s.slope));
}

TEST(RunBenchTest, DenseInstancesAreNeverDiscarded) {
  BenchSpec spec = SmallSpec();
  spec.sparsity = 0.0;
  for (const BenchRecord& r : RunBench(spec).records) EXPECT_EQ(r.discarded, 0);
}

TEST(RunBenchTest, IndependentOfThreadCount) {
  BenchSpec one = SmallSpec();
  one.threads = 1;
  BenchSpec three = SmallSpec();
  three.threads = 3;
  std::ostringstream a, b;
  WriteBenchCsv(a, RunBench(one));
  WriteBenchCsv(b, RunBench(three));
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunBenchTest, CsvOutput) {
  BenchSpec spec = SmallSpec();
  spec.sizes = {6};
  spec.seeds = 2;
  spec.distributions = {EntryDistribution::kUniform};
  const BenchReport report = RunBench(spec);
  std::ostringstream records, summary;
  WriteBenchCsv(records, report);
  WriteBenchSummaryCsv(summary, report);
  std::istringstream in(records.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "distribution,n,m,seed,discarded,iterations,xi,c_constant,fiedler,ok");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("uniform,6,12,", 0), 0u);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
  EXPECT_EQ(summary.str().rfind("distribution,n,samples,", 0), 0u);
  EXPECT_NE(summary.str().find("\nuniform,6,2,"), std::string::npos);
}

}  // namespace
}  // namespace balancekit
