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


// Sinkhorn's algorithm and its dual potential.
//
// One full iteration is a row half-step d1 <- p / (A d0) followed by a column
// half-step d0 <- q / (A^T d1). The state after t full iterations is state t;
// state 0 is the initial point (d0 = 1, d1 = 1 unless overridden). Snapshots
// of state t therefore follow a column half-step, so their column error is at
// rounding level and their row error carries the progress signal.

#ifndef BALANCEKIT_BALANCING_H_
#define BALANCEKIT_BALANCING_H_

#include <optional>
#include <string_view>
#include <vector>

#include "balancekit/core.h"

namespace balancekit {

enum class Variant { kPlain, kNormalized, kRegularized };
enum class StopMetric { kL1Marginal, kMaxScalingUpdate };
enum class Termination { kConverged, kMaxIter, kOverflow };

std::string_view VariantName(Variant v);
std::string_view TerminationName(Termination t);
Variant ParseVariant(std::string_view name);

// Scaling entries above this (or below its reciprocal) end a run with
// Termination::kOverflow.
inline constexpr double kOverflowThreshold = 1e300;

struct SinkhornConfig {
  Variant variant = Variant::kPlain;
  double alpha = 1.0;  // Gamma shape, regularized only
  double beta = 0.0;   // Gamma rate, regularized only
  int max_iterations = 100000;
  double tol = 1e-8;
  // kL1Marginal: ||r - p||_1 + ||c - q||_1 of state t (only the row term for
  // the regularized variant, whose fixed point does not match q).
  // kMaxScalingUpdate: largest |log d_new - log d_old| over both vectors.
  StopMetric stop_metric = StopMetric::kL1Marginal;
  bool record_history = false;
  bool record_trajectory = false;
  std::optional<ScalingState> initial;
};

// Throws kInvalidArgument for inconsistent settings.
void ValidateConfig(const SinkhornConfig& config);

struct PotentialValue {
  double g_dual = 0.0;     // (d1)^T A d0 - sum p log d1 - sum q log d0
  double g_reparam = 0.0;  // sum A_ij exp(u_j - v_i) + p^T v - q^T u
  std::optional<double> gap_to_reference;
};

// One entry per recorded state t. kl_col compares q against the column sums
// reached after the row half-step that leaves state t, which is the quantity
// the per-iteration decrease of g is made of:
//   g_t - g_{t+1} = kl_row(t) + kl_col(t).
struct IterationRecord {
  int t = 0;
  double g = 0.0;
  double l1_row_err = 0.0;
  double l1_col_err = 0.0;
  double kl_row = 0.0;
  double kl_col = 0.0;
};

struct Trajectory {
  std::vector<ScalingState> states;  // states[k].iteration == k
  bool starts_from_ones = false;  // d0 == 1 at t = 0
};

struct RunReport {
  Variant variant = Variant::kPlain;
  int iterations = 0;
  Termination termination = Termination::kMaxIter;
  double final_l1_row_err = 0.0;
  double final_l1_col_err = 0.0;
  std::vector<IterationRecord> history;
};

struct RunResult {
  ScalingState state;
  RunReport report;
  Trajectory trajectory;  // filled when config.record_trajectory is set
};

// Half-steps return a new state; iteration is left unchanged. Both throw
// kNumericOverflow when an updated entry leaves [1e-300, 1e300].
ScalingState HalfStepRow(const BalancingProblem& problem,
                         const ScalingState& state);
ScalingState HalfStepCol(const BalancingProblem& problem,
                         const ScalingState& state);

// d1 <- p / (A d0), then d0 <- (q + alpha - 1) / (A^T d1 + beta).
ScalingState RegularizedStep(const BalancingProblem& problem,
                             const ScalingState& state, double alpha,
                             double beta);

// (d0 / c, c * d1).
ScalingState ApplyGauge(const ScalingState& state, double c);

// Rescales so that prod(d0) == prod(d1), i.e. the centered log-scalings
// (u, v) = (log d0, -log d1) satisfy sum(u) + sum(v) = 0. The constant is
// computed in log space.
ScalingState NormalizeGauge(const ScalingState& state);
double LogGaugeConstant(const ScalingState& state);

// Runs the configured variant. Divergent scalings end the run with
// Termination::kOverflow and the last finite state rather than an exception.
RunResult Run(const BalancingProblem& problem, const SinkhornConfig& config);

PotentialValue Potential(const BalancingProblem& problem,
                         const ScalingState& state);

// Potential minimized by the Gamma-regularized iteration:
//   ((d1)^T A + beta 1^T) d0 - sum p log d1 - sum (q + alpha - 1) log d0.
double RegularizedPotential(const BalancingProblem& problem,
                            const ScalingState& state, double alpha,
                            double beta);

// Recomputes every term from the recorded states and returns
//   max_t |(g_t - g_{t+1}) - (D(p || r^(t)) + D(q || c^(t+1/2)))|
// where r^(t) are the row sums of state t and c^(t+1/2) the column sums after
// the next row half-step. Needs at least two states of a plain or normalized
// trajectory. Throws kInsufficientHistory.
double OptimalityGapIdentityCheck(const BalancingProblem& problem,
                                  const Trajectory& trajectory);

}  // namespace balancekit

#endif  // BALANCEKIT_BALANCING_H_
