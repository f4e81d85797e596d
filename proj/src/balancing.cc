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


#include "balancekit/balancing.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "balancekit/error.h"

namespace balancekit {
namespace {

void CheckRange(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (!std::isfinite(x) || x > kOverflowThreshold ||
        x < 1.0 / kOverflowThreshold) {
      throw Error(ErrorCode::kNumericOverflow,
                  std::string(what) + "[" + std::to_string(i) +
                      "] left [1e-300, 1e300]");
    }
  }
}

bool NeedsLogSpace(const ScalingState& s) {
  auto extreme = [](const Vector& v) {
    return v.minCoeff() < 1e-100 || v.maxCoeff() > 1e100;
  };
  return extreme(s.d0) || extreme(s.d1);
}

// sum_i w_i log x_i with the convention 0 log x = 0.
double WeightedLogSum(const Vector& w, const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) s += w[i] * std::log(x[i]);
  }
  return s;
}

// (d1)^T A d0, evaluated entrywise in log space when the scalings are extreme.
double BilinearTerm(const NonnegMatrix& a, const ScalingState& s) {
  if (!NeedsLogSpace(s)) return s.d1.dot(a.Multiply(s.d0));
  const Vector l0 = s.d0.array().log();
  const Vector l1 = s.d1.array().log();
  double total = 0.0;
  a.ForEachNonzero([&](int i, int j, double v) {
    total += std::exp(l1[i] + std::log(v) + l0[j]);
  });
  return total;
}

double MaxLogChange(const Vector& before, const Vector& after) {
  return (after.array().log() - before.array().log()).abs().maxCoeff();
}

bool StartsAtOnes(const ScalingState& s) {
  return (s.d0.array() == 1.0).all();
}

}  // namespace

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kPlain: return "plain";
    case Variant::kNormalized: return "normalized";
    case Variant::kRegularized: return "regularized";
  }
  return "plain";
}

std::string_view TerminationName(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIter: return "max_iter";
    case Termination::kOverflow: return "overflow";
  }
  return "max_iter";
}

Variant ParseVariant(std::string_view name) {
  if (name == "plain") return Variant::kPlain;
  if (name == "normalized") return Variant::kNormalized;
  if (name == "regularized") return Variant::kRegularized;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown variant '" + std::string(name) + "'");
}

void ValidateConfig(const SinkhornConfig& config) {
  if (!(config.tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tol must be positive");
  }
  if (config.max_iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations is negative");
  }
  if (config.variant == Variant::kRegularized &&
      !(config.alpha > 1.0 && config.beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "regularized variant needs alpha > 1 and beta > 0");
  }
}

ScalingState HalfStepRow(const BalancingProblem& problem,
                         const ScalingState& state) {
  ScalingState next = state;
  next.d1 = problem.p().cwiseQuotient(problem.a().Multiply(state.d0));
  CheckRange(next.d1, "d1");
  return next;
}

ScalingState HalfStepCol(const BalancingProblem& problem,
                         const ScalingState& state) {
  ScalingState next = state;
  next.d0 =
      problem.q().cwiseQuotient(problem.a().MultiplyTransposed(state.d1));
  CheckRange(next.d0, "d0");
  return next;
}

ScalingState RegularizedStep(const BalancingProblem& problem,
                             const ScalingState& state, double alpha,
                             double beta) {
  ScalingState next = HalfStepRow(problem, state);
  const Vector num = problem.q().array() + (alpha - 1.0);
  const Vector den = problem.a().MultiplyTransposed(next.d1).array() + beta;
  next.d0 = num.cwiseQuotient(den);
  CheckRange(next.d0, "d0");
  return next;
}

ScalingState ApplyGauge(const ScalingState& state, double c) {
  ScalingState next = state;
  next.d0 /= c;
  next.d1 *= c;
  return next;
}

double LogGaugeConstant(const ScalingState& state) {
  const double sum0 = state.d0.array().log().sum();
  const double sum1 = state.d1.array().log().sum();
  return (sum0 - sum1) /
         static_cast<double>(state.d0.size() + state.d1.size());
}

ScalingState NormalizeGauge(const ScalingState& state) {
  const double log_c = LogGaugeConstant(state);
  // Below the rounding noise of the two log sums the state is already
  // normalized; rescaling by exp(noise) would only perturb it.
  const double noise =
      4.0 * std::numeric_limits<double>::epsilon() *
      (state.d0.array().log().abs().sum() +
       state.d1.array().log().abs().sum()) /
      static_cast<double>(state.d0.size() + state.d1.size());
  if (std::abs(log_c) <= noise) return state;
  return ApplyGauge(state, std::exp(log_c));
}

PotentialValue Potential(const BalancingProblem& problem,
                         const ScalingState& state) {
  ValidateState(problem, state);
  PotentialValue out;
  out.g_dual = BilinearTerm(problem.a(), state) -
               WeightedLogSum(problem.p(), state.d1) -
               WeightedLogSum(problem.q(), state.d0);

  const Vector u = state.d0.array().log();
  const Vector v = -state.d1.array().log();
  double exp_sum = 0.0;
  problem.a().ForEachNonzero(
      [&](int i, int j, double a) { exp_sum += a * std::exp(u[j] - v[i]); });
  out.g_reparam = exp_sum + problem.p().dot(v) - problem.q().dot(u);

  if (problem.reference_potential()) {
    out.gap_to_reference = out.g_dual - *problem.reference_potential();
  }
  return out;
}

double RegularizedPotential(const BalancingProblem& problem,
                            const ScalingState& state, double alpha,
                            double beta) {
  ValidateState(problem, state);
  const Vector shifted = problem.q().array() + (alpha - 1.0);
  return BilinearTerm(problem.a(), state) + beta * state.d0.sum() -
         WeightedLogSum(problem.p(), state.d1) -
         WeightedLogSum(shifted, state.d0);
}

RunResult Run(const BalancingProblem& problem, const SinkhornConfig& config) {
  ValidateConfig(config);
  if (config.variant != Variant::kRegularized &&
      !problem.strictly_positive()) {
    throw Error(ErrorCode::kNonpositiveMarginal,
                "plain Sinkhorn needs strictly positive marginals");
  }
  RunResult result;
  ScalingState state =
      config.initial ? *config.initial : ScalingState::Ones(problem);
  ValidateState(problem, state);
  state.iteration = 0;

  const bool regularized = config.variant == Variant::kRegularized;
  const bool normalized = config.variant == Variant::kNormalized;
  auto potential = [&](const ScalingState& s) {
    return regularized
               ? RegularizedPotential(problem, s, config.alpha, config.beta)
               : Potential(problem, s).g_dual;
  };
  auto column_kl_after_row_step = [&](const ScalingState& half) {
    const Vector c =
        half.d0.cwiseProduct(problem.a().MultiplyTransposed(half.d1));
    return KlDivergence(problem.q(), c);
  };

  RunReport& report = result.report;
  report.variant = config.variant;
  if (config.record_trajectory) {
    result.trajectory.starts_from_ones = StartsAtOnes(state);
    result.trajectory.states.push_back(state);
  }

  Termination termination = Termination::kMaxIter;
  MarginalSnapshot snap = Marginals(problem, state);
  double update = std::numeric_limits<double>::infinity();
  for (int t = 0;; ++t) {
    // The regularized fixed point matches p but not q, so only the row error
    // is a convergence signal there. It says nothing about d0 until d0 has
    // been produced by a column update, hence the first step is mandatory.
    const double marginal_err =
        regularized ? snap.l1_row_err : snap.l1_row_err + snap.l1_col_err;
    const double metric =
        config.stop_metric == StopMetric::kL1Marginal ? marginal_err : update;
    if (metric < config.tol && !(regularized && t == 0)) {
      termination = Termination::kConverged;
      break;
    }
    if (t >= config.max_iterations) break;

    IterationRecord record;
    if (config.record_history) {
      record = {t, potential(state), snap.l1_row_err, snap.l1_col_err,
                snap.kl_row, 0.0};
    }
    ScalingState next;
    try {
      next = HalfStepRow(problem, state);
      if (normalized) next = NormalizeGauge(next);
      if (config.record_history) record.kl_col = column_kl_after_row_step(next);
      if (regularized) {
        const Vector num = problem.q().array() + (config.alpha - 1.0);
        const Vector den =
            problem.a().MultiplyTransposed(next.d1).array() + config.beta;
        next.d0 = num.cwiseQuotient(den);
        CheckRange(next.d0, "d0");
      } else {
        next = HalfStepCol(problem, next);
      }
      if (normalized) next = NormalizeGauge(next);
      CheckRange(next.d0, "d0");
      CheckRange(next.d1, "d1");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumericOverflow) throw;
      termination = Termination::kOverflow;
      break;
    }
    if (config.record_history) report.history.push_back(record);
    next.iteration = t + 1;
    update = std::max(MaxLogChange(state.d0, next.d0),
                      MaxLogChange(state.d1, next.d1));
    state = std::move(next);
    snap = Marginals(problem, state);
    if (config.record_trajectory) result.trajectory.states.push_back(state);
  }

  if (config.record_history) {
    IterationRecord last{state.iteration, potential(state), snap.l1_row_err,
                         snap.l1_col_err, snap.kl_row,
                         std::numeric_limits<double>::quiet_NaN()};
    try {
      ScalingState half = HalfStepRow(problem, state);
      last.kl_col = column_kl_after_row_step(half);
    } catch (const Error&) {
    }
    report.history.push_back(last);
  }
  report.iterations = state.iteration;
  report.termination = termination;
  report.final_l1_row_err = snap.l1_row_err;
  report.final_l1_col_err = snap.l1_col_err;
  result.state = std::move(state);
  return result;
}

double OptimalityGapIdentityCheck(const BalancingProblem& problem,
                                  const Trajectory& trajectory) {
  const auto& states = trajectory.states;
  if (states.size() < 2) {
    throw Error(ErrorCode::kInsufficientHistory,
                "need at least two recorded states");
  }
  double worst = 0.0;
  double g_next = Potential(problem, states[0]).g_dual;
  for (size_t k = 0; k + 1 < states.size(); ++k) {
    const double g_now = g_next;
    g_next = Potential(problem, states[k + 1]).g_dual;
    const MarginalSnapshot snap = Marginals(problem, states[k]);
    const ScalingState half = HalfStepRow(problem, states[k]);
    const Vector c =
        half.d0.cwiseProduct(problem.a().MultiplyTransposed(half.d1));
    const double predicted = snap.kl_row + KlDivergence(problem.q(), c);
    worst = std::max(worst, std::abs((g_now - g_next) - predicted));
  }
  return worst;
}

}  // namespace balancekit
