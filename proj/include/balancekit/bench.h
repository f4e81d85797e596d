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


// Random-instance benchmark for the complexity constant xi(A, p, q).

#ifndef BALANCEKIT_BENCH_H_
#define BALANCEKIT_BENCH_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string_view>
#include <vector>

#include "balancekit/core.h"

namespace balancekit {

enum class EntryDistribution { kFoldedGaussian, kUniform };
std::string_view DistributionName(EntryDistribution d);
EntryDistribution ParseDistribution(std::string_view name);

struct BenchSpec {
  std::vector<int> sizes{50, 100, 150, 200, 250, 300};  // n; m = 2n
  std::vector<EntryDistribution> distributions{
      EntryDistribution::kFoldedGaussian, EntryDistribution::kUniform};
  double sparsity = 0.8;  // probability that an entry is zero
  int seeds = 100;
  uint64_t base_seed = 20240607;
  double tol = 1e-10;  // Sinkhorn l1 tolerance relative to sum(p)
  int max_iterations = 100000;
  int max_redraws = 1000;  // per seed
  int threads = 0;         // 0: BALANCEKIT_THREADS or hardware concurrency
};

// n x m matrix with independent Bernoulli(sparsity) zeros (the mask is
// redrawn until no row or column is empty) and p, q uniform on (0, 1] with q
// rescaled so both sum to the same value.
BalancingProblem RandomInstance(int n, int m, EntryDistribution dist,
                                double sparsity, std::mt19937_64& rng);

struct BenchRecord {
  int n = 0;
  int m = 0;
  EntryDistribution distribution = EntryDistribution::kFoldedGaussian;
  int seed_index = 0;
  int discarded = 0;  // draws that did not converge before this one
  int iterations = 0;
  double xi = 0.0;
  double c_constant = 0.0;
  double fiedler = 0.0;
  bool ok = false;  // false when max_redraws ran out
};

struct BenchCell {
  int n = 0;
  EntryDistribution distribution = EntryDistribution::kFoldedGaussian;
  double median_xi = 0.0;
  double median_c = 0.0;
  double median_fiedler = 0.0;
  int discarded = 0;
  int samples = 0;
};

struct BenchSlope {
  EntryDistribution distribution = EntryDistribution::kFoldedGaussian;
  double slope = 0.0;  // least-squares slope of log median xi against log n
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::vector<BenchCell> cells;
  std::vector<BenchSlope> slopes;
};

// Worker count: spec.threads if positive, else BALANCEKIT_THREADS, else the
// hardware concurrency.
int BenchThreads(const BenchSpec& spec);

// Every (distribution, n, seed) instance draws from its own generator, so the
// report does not depend on the thread count.
BenchReport RunBench(const BenchSpec& spec);

double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y);
double Median(std::vector<double> values);

void WriteBenchCsv(std::ostream& out, const BenchReport& report);
void WriteBenchSummaryCsv(std::ostream& out, const BenchReport& report);

}  // namespace balancekit

#endif  // BALANCEKIT_BENCH_H_
