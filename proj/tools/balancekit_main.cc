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


// Command-line front end.
//
// Exit codes: 0 converged / success, 1 input or usage error, 2 iteration limit
// reached, 3 scalings diverged or the problem only admits a limit scaling,
// 4 infeasible choice dataset (the verdict is printed as JSON).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "balancekit/balancing.h"
#include "balancekit/bench.h"
#include "balancekit/choice.h"
#include "balancekit/choice_data.h"
#include "balancekit/error.h"
#include "balancekit/feasibility.h"
#include "balancekit/io.h"
#include "balancekit/mixture.h"
#include "balancekit/report_json.h"
#include "balancekit/spectral.h"

namespace balancekit {
namespace {

using nlohmann::json;

enum ExitCode {
  kExitOk = 0,
  kExitInput = 1,
  kExitMaxIter = 2,
  kExitDiverged = 3,
  kExitInfeasible = 4,
};

struct MatrixArgs {
  std::string matrix;
  std::string row_marginals;
  std::string col_marginals;

  void Register(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix, "Matrix Market file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--row-marginals", row_marginals, "CSV of p")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--col-marginals", col_marginals, "CSV of q")
        ->required()
        ->check(CLI::ExistingFile);
  }

  BalancingProblem Load() const {
    return BuildProblem(ReadMatrixMarketFile(matrix),
                        ReadVectorCsvFile(row_marginals),
                        ReadVectorCsvFile(col_marginals));
  }
};

void Emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
}

struct BalanceCmd {
  MatrixArgs input;
  std::string variant = "plain";
  double tol = 1e-8;
  int max_iters = 100000;
  double alpha = 2.0;
  double beta = 1.0;
  bool history = false;
  std::string report;
  std::string scalings;

  void Register(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand("balance", "Run Sinkhorn's algorithm");
    input.Register(cmd);
    cmd->add_option("--variant", variant, "plain | normalized | regularized")
        ->check(CLI::IsMember({"plain", "normalized", "regularized"}));
    cmd->add_option("--tol", tol, "l1 marginal tolerance");
    cmd->add_option("--max-iters", max_iters, "iteration limit");
    cmd->add_option("--alpha", alpha, "Gamma shape (regularized)");
    cmd->add_option("--beta", beta, "Gamma rate (regularized)");
    cmd->add_flag("--history", history, "include per-iteration records");
    cmd->add_option("--report", report, "RunReport JSON path (default stdout)");
    cmd->add_option("--scalings", scalings, "write d0 and d1 as JSON");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    const BalancingProblem problem = input.Load();
    SinkhornConfig config;
    config.variant = ParseVariant(variant);
    config.tol = tol;
    config.max_iterations = max_iters;
    config.alpha = alpha;
    config.beta = beta;
    config.record_history = history;
    const RunResult run = Run(problem, config);
    Emit(ToJson(run.report, history), report);
    if (!scalings.empty()) {
      Emit({{"d0", ToJson(run.state.d0)}, {"d1", ToJson(run.state.d1)}},
           scalings);
    }
    switch (run.report.termination) {
      case Termination::kConverged:
        return kExitOk;
      case Termination::kOverflow:
        std::cerr << "scalings diverged; the problem likely has only a limit "
                     "scaling (see the check command)\n";
        return kExitDiverged;
      case Termination::kMaxIter:
        break;
    }
    const FeasibilityVerdict verdict = CheckFeasibility(problem);
    std::cerr << "iteration limit reached; regime: "
              << RegimeName(verdict.regime) << "\n";
    return verdict.regime == Regime::kLimitScaling ? kExitDiverged
                                                   : kExitMaxIter;
  }

  int code = kExitOk;
};

struct EstimateCmd {
  std::string data;
  std::string norm = "simplex";
  double alpha = 0.0;
  double beta = 0.0;
  double augment = 0.0;
  double tol = 1e-11;
  int max_iters = 100000;
  std::string out;

  void Register(CLI::App* app) {
    CLI::App* cmd =
        app->add_subcommand("estimate", "Estimate Luce scores from choices");
    cmd->add_option("--data", data, "JSONL choice data")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--norm", norm, "simplex | sum-m")
        ->check(CLI::IsMember({"simplex", "sum-m"}));
    cmd->add_option("--alpha", alpha, "Gamma prior shape (> 1)");
    cmd->add_option("--beta", beta, "Gamma prior rate (> 0)");
    cmd->add_option("--augment", augment, "pseudo-count per item (> 0)");
    cmd->add_option("--tol", tol, "Sinkhorn tolerance relative to sum(R)");
    cmd->add_option("--max-iters", max_iters, "iteration limit");
    cmd->add_option("--out", out, "output path (default stdout)");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    const ChoiceDataset dataset = ReadChoiceJsonlFile(data);
    const ReducedDataset reduced = Reduce(dataset);
    EstimateConfig config;
    config.normalization = norm == "sum-m" ? ScoreNormalization::kSumM
                                           : ScoreNormalization::kSimplex;
    config.tol = tol;
    config.max_iterations = max_iters;
    const bool regularize = alpha != 0.0 || beta != 0.0;
    if (regularize && augment != 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--augment cannot be combined with --alpha/--beta");
    }
    LuceEstimate est;
    try {
      if (regularize) {
        est = EstimateRegularized(reduced, alpha, beta, config);
      } else if (augment != 0.0) {
        est = EstimateAugmented(reduced, augment, config);
      } else {
        est = EstimateMle(reduced, config);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleDataset) throw;
      std::cerr << e.what() << "\n";
      const EquivalenceCheck check = CrossCheckEquivalence(reduced);
      Emit({{"error", "InfeasibleDataset"},
            {"connectivity", ToJson(check.connectivity)},
            {"verdict", ToJson(check.verdict)}},
           out);
      return kExitInfeasible;
    }
    Emit(ToJson(est), out);
    if (est.termination == Termination::kOverflow) return kExitDiverged;
    return est.converged ? kExitOk : kExitMaxIter;
  }

  int code = kExitOk;
};

struct CheckCmd {
  std::string data;
  std::string matrix, row_marginals, col_marginals;
  std::string out;

  void Register(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "check", "Existence/uniqueness verdict for choice data or a matrix");
    cmd->add_option("--data", data, "JSONL choice data")
        ->check(CLI::ExistingFile);
    cmd->add_option("--matrix", matrix, "Matrix Market file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--row-marginals", row_marginals, "CSV of p")
        ->check(CLI::ExistingFile);
    cmd->add_option("--col-marginals", col_marginals, "CSV of q")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "output path (default stdout)");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    if (!data.empty()) {
      const ReducedDataset reduced = Reduce(ReadChoiceJsonlFile(data));
      const EquivalenceCheck check = CrossCheckEquivalence(reduced);
      Emit({{"connectivity", ToJson(check.connectivity)},
            {"verdict", ToJson(check.verdict)},
            {"equivalence_agrees", check.agree}},
           out);
      return kExitOk;
    }
    if (matrix.empty() || row_marginals.empty() || col_marginals.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "check needs --data or --matrix with both marginals");
    }
    const BalancingProblem problem =
        BuildProblem(ReadMatrixMarketFile(matrix),
                     ReadVectorCsvFile(row_marginals),
                     ReadVectorCsvFile(col_marginals));
    Emit({{"verdict", ToJson(CheckFeasibility(problem))}}, out);
    return kExitOk;
  }

  int code = kExitOk;
};

struct DiagnoseCmd {
  MatrixArgs input;
  double tol = 1e-12;
  int max_iters = 20000;
  std::string out;

  void Register(CLI::App* app) {
    CLI::App* cmd =
        app->add_subcommand("diagnose", "Spectral rate diagnostics");
    input.Register(cmd);
    cmd->add_option("--tol", tol, "l1 tolerance relative to sum(p)");
    cmd->add_option("--max-iters", max_iters, "iteration limit");
    cmd->add_option("--out", out, "output path (default stdout)");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    const BalancingProblem problem = input.Load();
    SinkhornConfig config;
    config.tol = tol * problem.total_mass();
    config.max_iterations = max_iters;
    config.record_trajectory = true;
    const RunResult run = Run(problem, config);
    RateReport rates;
    rates.global = GlobalRateBound(problem, run.trajectory);
    const bool converged = run.report.termination == Termination::kConverged;
    if (converged) {
      rates.asymptotic = AsymptoticRate(problem, run.state, 10 * tol);
      rates.complexity = ComputeComplexityConstants(
          problem, run.state, rates.global.fiedler, 10 * tol);
    }
    json j = ToJson(rates);
    j["run"] = ToJson(run.report, false);
    j["regime"] = RegimeName(CheckFeasibility(problem).regime);
    Emit(j, out);
    if (converged) return kExitOk;
    return run.report.termination == Termination::kOverflow ? kExitDiverged
                                                            : kExitMaxIter;
  }

  int code = kExitOk;
};

struct MixtureCmd {
  std::string data;
  int components = 2;
  uint64_t seed = 0;
  int max_rounds = 500;
  double tol = 1e-9;
  std::string out;

  void Register(CLI::App* app) {
    CLI::App* cmd =
        app->add_subcommand("mixture", "EM for a mixture of Luce models");
    cmd->add_option("--data", data, "JSONL choice data")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--components", components, "number of components")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "initialization seed");
    cmd->add_option("--max-rounds", max_rounds, "EM round limit");
    cmd->add_option("--tol", tol, "stop when a round gains less than this");
    cmd->add_option("--out", out, "output path (default stdout)");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    const ChoiceDataset dataset = ReadChoiceJsonlFile(data);
    EmConfig config;
    config.num_components = components;
    config.seed = seed;
    config.max_rounds = max_rounds;
    config.tol = tol;
    const EmResult result = RunEm(dataset, config);
    Emit({{"model", ToJson(result.model, dataset.items())},
          {"trace", ToJson(result.trace)}},
         out);
    return result.trace.converged ? kExitOk : kExitMaxIter;
  }

  int code = kExitOk;
};

struct BenchCmd {
  std::vector<int> sizes{50, 100, 150, 200, 250, 300};
  std::string dist = "both";
  double sparsity = 0.8;
  int seeds = 100;
  uint64_t seed = BenchSpec().base_seed;
  int threads = 0;
  std::string csv;
  std::string summary;
  std::string out;

  void Register(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "bench", "Complexity-constant benchmark on random sparse instances");
    cmd->add_option("--sizes", sizes, "row counts n (m = 2n)")->delimiter(',');
    cmd->add_option("--dist", dist, "folded_gaussian | uniform | both")
        ->check(CLI::IsMember({"folded_gaussian", "uniform", "both"}));
    cmd->add_option("--sparsity", sparsity, "zero probability in [0, 1)");
    cmd->add_option("--seeds", seeds, "instances per cell");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--csv", csv, "per-instance CSV path");
    cmd->add_option("--summary", summary, "per-cell CSV path");
    cmd->add_option("--out", out, "JSON summary path (default stdout)");
    cmd->callback([this] { code = Execute(); });
  }

  int Execute() {
    BenchSpec spec;
    spec.sizes = sizes;
    if (dist != "both") spec.distributions = {ParseDistribution(dist)};
    spec.sparsity = sparsity;
    spec.seeds = seeds;
    spec.base_seed = seed;
    spec.threads = threads;
    const BenchReport report = RunBench(spec);
    auto write = [&](const std::string& path, auto writer) {
      if (path.empty()) return;
      std::ofstream f(path);
      if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
      writer(f, report);
    };
    write(csv, WriteBenchCsv);
    write(summary, WriteBenchSummaryCsv);
    Emit(ToJson(report), out);
    return kExitOk;
  }

  int code = kExitOk;
};

int Main(int argc, char** argv) {
  CLI::App app{"Matrix balancing and Luce choice model toolkit"};
  app.require_subcommand(1);
  BalanceCmd balance;
  EstimateCmd estimate;
  CheckCmd check;
  DiagnoseCmd diagnose;
  MixtureCmd mixture;
  BenchCmd bench;
  balance.Register(&app);
  estimate.Register(&app);
  check.Register(&app);
  diagnose.Register(&app);
  mixture.Register(&app);
  bench.Register(&app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInfeasibleDataset ? kExitInfeasible
                                                     : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  for (const CLI::App* sub : app.get_subcommands()) {
    const std::string name = sub->get_name();
    if (name == "balance") return balance.code;
    if (name == "estimate") return estimate.code;
    if (name == "check") return check.code;
    if (name == "diagnose") return diagnose.code;
    if (name == "mixture") return mixture.code;
    if (name == "bench") return bench.code;
  }
  return kExitInput;
}

}  // namespace
}  // namespace balancekit

int main(int argc, char** argv) { return balancekit::Main(argc, argv); }
