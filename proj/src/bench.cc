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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>

#include "balancekit/balancing.h"
#include "balancekit/error.h"
#include "balancekit/io.h"
#include "balancekit/spectral.h"

namespace balancekit {
namespace {

BenchRecord RunOne(const BenchSpec& spec, EntryDistribution dist, int n,
                   int seed_index) {
  std::seed_seq seq{static_cast<uint64_t>(spec.base_seed),
                    static_cast<uint64_t>(dist), static_cast<uint64_t>(n),
                    static_cast<uint64_t>(seed_index)};
  std::mt19937_64 rng(seq);
  BenchRecord rec;
  rec.n = n;
  rec.m = 2 * n;
  rec.distribution = dist;
  rec.seed_index = seed_index;
  for (int draw = 0; draw < spec.max_redraws; ++draw) {
    const BalancingProblem problem =
        RandomInstance(rec.n, rec.m, dist, spec.sparsity, rng);
    SinkhornConfig config;
    config.tol = spec.tol * problem.total_mass();
    config.max_iterations = spec.max_iterations;
    const RunResult run = Run(problem, config);
    if (run.report.termination != Termination::kConverged) {
      ++rec.discarded;
      continue;
    }
    const ComplexityConstants cc =
        ComputeComplexityConstants(problem, run.state, 10 * spec.tol);
    rec.iterations = run.report.iterations;
    rec.xi = cc.xi_constant;
    rec.c_constant = cc.c_constant;
    rec.fiedler = cc.fiedler;
    rec.ok = true;
    break;
  }
  return rec;
}

}  // namespace

std::string_view DistributionName(EntryDistribution d) {
  return d == EntryDistribution::kFoldedGaussian ? "folded_gaussian"
                                                 : "uniform";
}

EntryDistribution ParseDistribution(std::string_view name) {
  if (name == "folded_gaussian") return EntryDistribution::kFoldedGaussian;
  if (name == "uniform") return EntryDistribution::kUniform;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown distribution '" + std::string(name) + "'");
}

BalancingProblem RandomInstance(int n, int m, EntryDistribution dist,
                                double sparsity, std::mt19937_64& rng) {
  if (n < 1 || m < 1 || !(sparsity >= 0.0 && sparsity < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad instance parameters");
  }
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::bernoulli_distribution zero(sparsity);
  auto draw_entry = [&] {
    // Both distributions are continuous, so an exact zero has probability 0;
    // the loop only guards the measure-zero case.
    double v = 0.0;
    while (v == 0.0) {
      v = dist == EntryDistribution::kFoldedGaussian ? std::abs(normal(rng))
                                                     : unit(rng);
    }
    return v;
  };
  std::vector<MatrixEntry> entries;
  while (true) {
    entries.clear();
    std::vector<char> row_hit(n, 0), col_hit(m, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (zero(rng)) continue;
        entries.push_back({i, j, draw_entry()});
        row_hit[i] = col_hit[j] = 1;
      }
    }
    const bool full = std::all_of(row_hit.begin(), row_hit.end(),
                                  [](char c) { return c; }) &&
                      std::all_of(col_hit.begin(), col_hit.end(),
                                  [](char c) { return c; });
    if (full) break;
  }
  Vector p(n), q(m);
  for (int i = 0; i < n; ++i) p[i] = 1.0 - unit(rng);
  for (int j = 0; j < m; ++j) q[j] = 1.0 - unit(rng);
  q *= p.sum() / q.sum();
  return BuildProblem(NonnegMatrix::FromEntries(n, m, entries), p, q);
}

int BenchThreads(const BenchSpec& spec) {
  if (spec.threads > 0) return spec.threads;
  if (const char* env = std::getenv("BALANCEKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchReport RunBench(const BenchSpec& spec) {
  struct Task {
    EntryDistribution dist;
    int n;
    int seed;
  };
  std::vector<Task> tasks;
  for (EntryDistribution d : spec.distributions) {
    for (int n : spec.sizes) {
      for (int k = 0; k < spec.seeds; ++k) tasks.push_back({d, n, k});
    }
  }
  BenchReport report;
  report.records.resize(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < tasks.size(); k = next++) {
      report.records[k] = RunOne(spec, tasks[k].dist, tasks[k].n,
                                 tasks[k].seed);
    }
  };
  const int threads =
      std::min<int>(BenchThreads(spec), std::max<size_t>(1, tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (EntryDistribution d : spec.distributions) {
    std::vector<double> ns, median_xis;
    for (int n : spec.sizes) {
      BenchCell cell;
      cell.n = n;
      cell.distribution = d;
      std::vector<double> xi, c, f;
      for (const BenchRecord& r : report.records) {
        if (r.distribution != d || r.n != n) continue;
        cell.discarded += r.discarded;
        if (!r.ok) continue;
        xi.push_back(r.xi);
        c.push_back(r.c_constant);
        f.push_back(r.fiedler);
      }
      cell.samples = static_cast<int>(xi.size());
      if (cell.samples > 0) {
        cell.median_xi = Median(xi);
        cell.median_c = Median(c);
        cell.median_fiedler = Median(f);
        ns.push_back(static_cast<double>(n));
        median_xis.push_back(cell.median_xi);
      }
      report.cells.push_back(cell);
    }
    report.slopes.push_back({d, ns.size() >= 2
                                    ? LogLogSlope(ns, median_xis)
                                    : std::nan("")});
  }
  return report;
}

double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t k = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

void WriteBenchCsv(std::ostream& out, const BenchReport& report) {
  out << "distribution,n,m,seed,discarded,iterations,xi,c_constant,fiedler,"
         "ok\n";
  for (const BenchRecord& r : report.records) {
    out << DistributionName(r.distribution) << ',' << r.n << ',' << r.m << ','
        << r.seed_index << ',' << r.discarded << ',' << r.iterations << ','
        << FormatDouble(r.xi) << ',' << FormatDouble(r.c_constant) << ','
        << FormatDouble(r.fiedler) << ',' << (r.ok ? 1 : 0) << '\n';
  }
}

void WriteBenchSummaryCsv(std::ostream& out, const BenchReport& report) {
  out << "distribution,n,samples,discarded,median_xi,median_c,"
         "median_fiedler\n";
  for (const BenchCell& c : report.cells) {
    out << DistributionName(c.distribution) << ',' << c.n << ',' << c.samples
        << ',' << c.discarded << ',' << FormatDouble(c.median_xi) << ','
        << FormatDouble(c.median_c) << ',' << FormatDouble(c.median_fiedler)
        << '\n';
  }
}

}  // namespace balancekit
