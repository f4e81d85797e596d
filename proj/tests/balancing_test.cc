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
#include <random>
#include <vector>

#include "Eigen/Dense"
#include "balancekit/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace balancekit {
namespace {

using testing::CodeOf;

Vector Vec(std::initializer_list<double> v) {
  Vector out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

NonnegMatrix Dense(int n, int m, std::initializer_list<double> values) {
  Eigen::MatrixXd d(n, m);
  auto it = values.begin();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) d(i, j) = *it++;
  }
  return NonnegMatrix::FromDense(d);
}

BalancingProblem CounterExample() {
  return BuildProblem(Dense(2, 2, {3, 1, 0, 2}), Vec({3, 3}), Vec({3, 3}));
}

BalancingProblem Uniform2() {
  return BuildProblem(Dense(2, 2, {1, 1, 1, 1}), Vec({1, 1}), Vec({1, 1}));
}

SinkhornConfig Fixed(int iterations) {
  SinkhornConfig c;
  c.max_iterations = iterations;
  c.tol = 1e-300;
  return c;
}

TEST(HalfStepTest, HandArithmetic) {
  const BalancingProblem u = Uniform2();
  ScalingState s = HalfStepRow(u, ScalingState::Ones(u));
  EXPECT_EQ(s.d1, Vec({0.5, 0.5}));
  s = HalfStepCol(u, s);
  EXPECT_EQ(s.d0, Vec({1, 1}));
  EXPECT_EQ(s.iteration, 0);

  const BalancingProblem ce = CounterExample();
  s = HalfStepRow(ce, ScalingState::Ones(ce));
  EXPECT_DOUBLE_EQ(s.d1[0], 0.75);
  EXPECT_DOUBLE_EQ(s.d1[1], 1.5);
  s = HalfStepCol(ce, s);
  EXPECT_DOUBLE_EQ(s.d0[0], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.d0[1], 0.8);
}

TEST(HalfStepTest, OverflowIsReported) {
  const BalancingProblem u = Uniform2();
  const ScalingState tiny{Vec({1e-301, 1e-301}), Vec({1, 1}), 0};
  EXPECT_EQ(CodeOf([&] { HalfStepRow(u, tiny); }),
            ErrorCode::kNumericOverflow);
}

TEST(RegularizedStepTest, HandArithmetic) {
  const BalancingProblem prob =
      BuildProblem(Dense(1, 2, {1, 1}), Vec({1}), Vec({0, 1}),
                   MarginalPolicy::kAllowZero);
  const ScalingState s =
      RegularizedStep(prob, ScalingState::Ones(prob), 2.0, 1.0);
  EXPECT_DOUBLE_EQ(s.d1[0], 0.5);
  EXPECT_DOUBLE_EQ(s.d0[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.d0[1], 4.0 / 3.0);
}

TEST(GaugeTest, ApplyGaugeExample) {
  const ScalingState s{Vec({4, 1}), Vec({1}), 0};
  const ScalingState g = ApplyGauge(s, 2.0);
  EXPECT_EQ(g.d0, Vec({2, 0.5}));
  EXPECT_EQ(g.d1, Vec({2}));
}

TEST(GaugeTest, NormalizeBalancesLogSums) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 50; ++k) {
    const ScalingState s{testing::RandomPositiveVector(7, rng, 1e-5, 1e5),
                         testing::RandomPositiveVector(4, rng, 1e-5, 1e5), 0};
    const ScalingState g = NormalizeGauge(s);
    EXPECT_LE(std::abs(g.d0.array().log().sum() - g.d1.array().log().sum()),
              1e-9);
    // Idempotence up to a few ulp.
    const ScalingState h = NormalizeGauge(g);
    for (int j = 0; j < 7; ++j) {
      EXPECT_LE(std::abs(h.d0[j] - g.d0[j]), 4 * 2.3e-16 * g.d0[j]);
    }
  }
}

TEST(GaugeTest, NormalizeLeavesPotentialUnchanged) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const BalancingProblem prob = testing::RandomPositiveProblem(5, 6, rng);
    const ScalingState s{testing::RandomPositiveVector(6, rng, 0.01, 100),
                         testing::RandomPositiveVector(5, rng, 0.01, 100), 0};
    const double before = Potential(prob, s).g_reparam;
    const double after = Potential(prob, NormalizeGauge(s)).g_reparam;
    EXPECT_LE(std::abs(before - after), 1e-10 * std::abs(before));
    const double scaled = Potential(prob, ApplyGauge(s, 7.5)).g_dual;
    EXPECT_LE(std::abs(scaled - Potential(prob, s).g_dual),
              1e-10 * std::abs(before));
  }
}

TEST(PotentialTest, ScalarExampleAndFormsAgree) {
  const BalancingProblem one = BuildProblem(Dense(1, 1, {1}), Vec({1}),
                                            Vec({1}));
  const PotentialValue v = Potential(one, ScalingState::Ones(one));
  EXPECT_EQ(v.g_dual, 1.0);
  EXPECT_EQ(v.g_reparam, 1.0);
  EXPECT_FALSE(v.gap_to_reference.has_value());
  EXPECT_EQ(Potential(one.WithReferencePotential(0.25),
                      ScalingState::Ones(one))
                .gap_to_reference,
            0.75);

  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(6, 4, 0.4, rng);
    const ScalingState s{testing::RandomPositiveVector(4, rng, 1e-3, 1e3),
                         testing::RandomPositiveVector(6, rng, 1e-3, 1e3), 0};
    const PotentialValue pv = Potential(prob, s);
    EXPECT_LE(std::abs(pv.g_dual - pv.g_reparam),
              1e-9 * std::max(1.0, std::abs(pv.g_dual)));
  }
}

TEST(PotentialTest, LogSpaceForExtremeScalings) {
  const BalancingProblem u = Uniform2();
  const ScalingState s{Vec({1e-200, 1e-200}), Vec({1e200, 1e200}), 0};
  const PotentialValue v = Potential(u, s);
  // Scaled matrix is all ones: g = 4 - 2 log(1e200) + 2 log(1e200) = 4.
  EXPECT_NEAR(v.g_dual, 4.0, 1e-9);
  EXPECT_NEAR(v.g_reparam, 4.0, 1e-9);
}

TEST(ConfigTest, RejectsInconsistentSettings) {
  SinkhornConfig c;
  c.tol = 0.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kInvalidArgument);
  c = {};
  c.variant = Variant::kRegularized;
  c.alpha = 1.0;
  c.beta = 1.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kInvalidArgument);
  c.alpha = 2.0;
  c.beta = 0.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kInvalidArgument);
  c.beta = 1.0;
  EXPECT_NO_THROW(ValidateConfig(c));
  EXPECT_EQ(ParseVariant("normalized"), Variant::kNormalized);
  EXPECT_EQ(CodeOf([] { ParseVariant("fast"); }), ErrorCode::kInvalidArgument);
}

TEST(RunTest, RankOneBalancesInOnePass) {
  const BalancingProblem u = Uniform2();
  const RunResult run = balancekit::Run(u, SinkhornConfig{});
  EXPECT_EQ(run.report.termination, Termination::kConverged);
  EXPECT_EQ(run.report.iterations, 1);
  EXPECT_EQ(Marginals(u, run.state).r, u.p());
}

TEST(RunTest, CounterExampleHitsIterationLimit) {
  const BalancingProblem ce = CounterExample();
  const RunResult run = balancekit::Run(ce, SinkhornConfig{});
  EXPECT_EQ(run.report.termination, Termination::kMaxIter);
  EXPECT_EQ(run.report.iterations, 100000);
  const Eigen::MatrixXd hat = ScaledMatrix(ce, run.state).ToDense();
  EXPECT_NEAR(hat(0, 0), 3.0, 1e-4);
  EXPECT_NEAR(hat(1, 1), 3.0, 1e-4);
  EXPECT_GT(hat(0, 1), 0.0);
  EXPECT_LT(hat(0, 1), 1e-4);
}

TEST(RunTest, CounterExampleEntryDecaysLikeOneOverT) {
  const BalancingProblem ce = CounterExample();
  ScalingState s = ScalingState::Ones(ce);
  for (int t = 1; t <= 20000; ++t) {
    s = HalfStepCol(ce, HalfStepRow(ce, s));
    if (t >= 1000 && t % 1000 == 0) {
      const double prod = t * s.d1[0] * ce.a().Coeff(0, 1) * s.d0[1];
      EXPECT_GT(prod, 0.5);
      EXPECT_LT(prod, 10.0);
    }
  }
}

TEST(RunTest, InfeasibleProblemEndsInOverflow) {
  // Column 0 needs 3 units but only row 0 (mass 1) reaches it.
  const BalancingProblem prob =
      BuildProblem(Dense(2, 2, {1, 1, 0, 1}), Vec({1, 3}), Vec({3, 1}));
  const RunResult run = balancekit::Run(prob, SinkhornConfig{});
  EXPECT_EQ(run.report.termination, Termination::kOverflow);
  EXPECT_TRUE(run.state.d0.allFinite());
  EXPECT_TRUE(run.state.d1.allFinite());
}

TEST(RunTest, PlainRejectsZeroMarginals) {
  const BalancingProblem prob =
      BuildProblem(Dense(1, 2, {1, 1}), Vec({1}), Vec({0, 1}),
                   MarginalPolicy::kAllowZero);
  EXPECT_EQ(CodeOf([&] { balancekit::Run(prob, SinkhornConfig{}); }),
            ErrorCode::kNonpositiveMarginal);
  SinkhornConfig reg;
  reg.variant = Variant::kRegularized;
  reg.alpha = 2.0;
  reg.beta = 1.0;
  EXPECT_EQ(balancekit::Run(prob, reg).report.termination, Termination::kConverged);
}

TEST(RunTest, MatchesNewtonMinimizer) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 10; ++k) {
    const BalancingProblem prob = testing::RandomPositiveProblem(10, 20, rng);
    const RunResult run = balancekit::Run(prob, SinkhornConfig{});
    ASSERT_EQ(run.report.termination, Termination::kConverged);
    EXPECT_LT(run.report.final_l1_row_err + run.report.final_l1_col_err,
              1e-8);
    const Vector oracle = testing::NewtonPotentialMinimizer(
        prob.a().ToDense(), prob.p(), prob.q());
    const ScalingState ref{oracle.head(20), oracle.tail(10), 0};
    const Eigen::MatrixXd a = ScaledMatrix(prob, run.state).ToDense();
    const Eigen::MatrixXd b = ScaledMatrix(prob, ref).ToDense();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(RunTest, StopOnScalingUpdate) {
  std::mt19937_64 rng(14);
  const BalancingProblem prob = testing::RandomPositiveProblem(4, 6, rng);
  SinkhornConfig c;
  c.stop_metric = StopMetric::kMaxScalingUpdate;
  c.tol = 1e-12;
  const RunResult run = balancekit::Run(prob, c);
  EXPECT_EQ(run.report.termination, Termination::kConverged);
  EXPECT_LT(run.report.final_l1_row_err, 1e-9);
}

TEST(RunTest, InitialStateOverride) {
  std::mt19937_64 rng(15);
  const BalancingProblem prob = testing::RandomPositiveProblem(4, 5, rng);
  SinkhornConfig c;
  c.tol = 1e-12;
  const RunResult solved = balancekit::Run(prob, c);
  c.initial = solved.state;
  c.record_trajectory = true;
  const RunResult again = balancekit::Run(prob, c);
  EXPECT_EQ(again.report.iterations, 0);
  EXPECT_FALSE(again.trajectory.starts_from_ones);
  EXPECT_EQ(again.trajectory.states.size(), 1u);
}

TEST(RunTest, HistoryLayout) {
  std::mt19937_64 rng(16);
  const BalancingProblem prob = testing::RandomPositiveProblem(3, 4, rng);
  SinkhornConfig c = Fixed(7);
  c.record_history = true;
  c.record_trajectory = true;
  const RunResult run = balancekit::Run(prob, c);
  ASSERT_EQ(run.report.history.size(), 8u);
  ASSERT_EQ(run.trajectory.states.size(), 8u);
  EXPECT_TRUE(run.trajectory.starts_from_ones);
  for (int t = 0; t < 8; ++t) {
    EXPECT_EQ(run.report.history[t].t, t);
    EXPECT_EQ(run.trajectory.states[t].iteration, t);
    EXPECT_DOUBLE_EQ(run.report.history[t].g,
                     Potential(prob, run.trajectory.states[t]).g_dual);
  }
}

// Properties along trajectories.

TEST(BalancingPropertyTest, MonotoneDescentEveryVariant) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 30; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(6, 9, 0.5, rng);
    for (Variant v : {Variant::kPlain, Variant::kNormalized,
                      Variant::kRegularized}) {
      SinkhornConfig c = Fixed(100);
      c.variant = v;
      c.alpha = 1.5;
      c.beta = 0.3;
      c.record_history = true;
      const RunResult run = balancekit::Run(prob, c);
      const auto& h = run.report.history;
      for (size_t t = 1; t < h.size(); ++t) {
        EXPECT_LE(h[t].g, h[t - 1].g + 1e-12 * std::abs(h[t - 1].g))
            << VariantName(v) << " t=" << t;
      }
    }
  }
}

TEST(BalancingPropertyTest, ColumnsExactAfterColumnStep) {
  std::mt19937_64 rng(18);
  for (int k = 0; k < 30; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(8, 5, 0.5, rng);
    SinkhornConfig c = Fixed(20);
    c.record_trajectory = true;
    const RunResult run = balancekit::Run(prob, c);
    for (size_t t = 1; t < run.trajectory.states.size(); ++t) {
      EXPECT_LE(Marginals(prob, run.trajectory.states[t]).l1_col_err,
                1e-12 * prob.q().sum());
    }
  }
}

TEST(BalancingPropertyTest, PlainAndNormalizedPotentialsAgree) {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 30; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(7, 6, 0.4, rng);
    SinkhornConfig c = Fixed(60);
    c.record_history = true;
    const RunResult plain = balancekit::Run(prob, c);
    c.variant = Variant::kNormalized;
    const RunResult norm = balancekit::Run(prob, c);
    // Either run may stop early once its error is exactly zero.
    const size_t common =
        std::min(plain.report.history.size(), norm.report.history.size());
    for (size_t t = 0; t < common; ++t) {
      const double a = plain.report.history[t].g;
      const double b = norm.report.history[t].g;
      EXPECT_LE(std::abs(a - b), 1e-9 * std::abs(a));
    }
  }
}

TEST(BalancingPropertyTest, PinskerChain) {
  std::mt19937_64 rng(20);
  for (int k = 0; k < 30; ++k) {
    BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(5, 8, 0.4, rng);
    // Unit mass, where the chain holds in its plain form.
    const double mu = prob.total_mass();
    prob = BuildProblem(prob.a(), prob.p() / mu, prob.q() / mu);
    SinkhornConfig c = Fixed(40);
    c.record_history = true;
    const RunResult run = balancekit::Run(prob, c);
    const auto& h = run.report.history;
    for (size_t t = 1; t + 1 < h.size(); ++t) {
      const double decrease = h[t].kl_row + h[t].kl_col;
      EXPECT_LE(h[t].l1_row_err * h[t].l1_row_err,
                2 * decrease * (1 + 1e-9) + 1e-30);
      EXPECT_NEAR(h[t].g - h[t + 1].g, decrease, 1e-12);
    }
  }
}

TEST(GapIdentityTest, RankOneCase) {
  std::mt19937_64 rng(21);
  const Vector x = testing::RandomPositiveVector(4, rng);
  Vector q = testing::RandomPositiveVector(5, rng);
  Vector p = testing::RandomPositiveVector(4, rng);
  q *= p.sum() / q.sum();
  const BalancingProblem prob =
      BuildProblem(NonnegMatrix::FromDense(x * q.transpose()), p, q);
  SinkhornConfig c = Fixed(1);
  c.record_history = true;
  c.record_trajectory = true;
  const RunResult run = balancekit::Run(prob, c);
  const auto& h = run.report.history;
  ASSERT_EQ(h.size(), 2u);
  EXPECT_NEAR(h[1].l1_row_err, 0.0, 1e-13);
  EXPECT_NEAR(h[0].kl_col, 0.0, 1e-13);
  EXPECT_NEAR(h[0].g - h[1].g, KlDivergence(p, prob.a().RowSums()), 1e-12);
  EXPECT_LE(OptimalityGapIdentityCheck(prob, run.trajectory), 1e-12);
}

TEST(GapIdentityTest, RandomProblems) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 100; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(5, 7, 0.3, rng);
    SinkhornConfig c = Fixed(50);
    c.record_trajectory = true;
    const RunResult run = balancekit::Run(prob, c);
    EXPECT_LE(OptimalityGapIdentityCheck(prob, run.trajectory), 1e-9);
  }
}

TEST(GapIdentityTest, NeedsTwoStates) {
  const BalancingProblem u = Uniform2();
  Trajectory t;
  t.states.push_back(ScalingState::Ones(u));
  EXPECT_EQ(CodeOf([&] { OptimalityGapIdentityCheck(u, t); }),
            ErrorCode::kInsufficientHistory);
}

TEST(OracleTest, SolvedStateIsGridMinimum) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 5; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(3, 4, 0.3, rng);
    SinkhornConfig c;
    c.tol = 1e-13;
    const RunResult run = balancekit::Run(prob, c);
    ASSERT_EQ(run.report.termination, Termination::kConverged);
    const double g_star = Potential(prob, run.state).g_reparam;
    // Grid on a random two-dimensional slice through (u*, v*).
    Vector e1(7), e2(7);
    for (int i = 0; i < 7; ++i) {
      e1[i] = normal(rng);
      e2[i] = normal(rng);
    }
    e1.normalize();
    e2.normalize();
    for (int a = -10; a <= 10; ++a) {
      for (int b = -10; b <= 10; ++b) {
        const Vector step = 1e-2 * (a * e1 + b * e2);
        ScalingState s = run.state;
        s.d0 = s.d0.array() * step.head(4).array().exp();
        s.d1 = s.d1.array() * step.tail(3).array().exp();
        EXPECT_GE(Potential(prob, s).g_reparam, g_star - 1e-12);
      }
    }
  }
}

TEST(RegularizedTest, ContinuationApproachesPlainFixedPoint) {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 5; ++k) {
    const BalancingProblem prob =
        testing::RandomFeasibleSparseProblem(5, 6, 0.3, rng);
    SinkhornConfig plain;
    plain.tol = 1e-12;
    const RunResult a = balancekit::Run(prob, plain);
    SinkhornConfig reg = plain;
    reg.variant = Variant::kRegularized;
    reg.alpha = 1 + 1e-6;
    reg.beta = 1e-6;
    // The prior pins sum(d0) = m (alpha - 1) / beta. From ones the scale mode
    // contracts at rate 1 - O(beta), so start on the right scale; the fixed
    // point is unique either way.
    const double target = 6 * (reg.alpha - 1) / reg.beta;
    reg.initial = ApplyGauge(a.state, a.state.d0.sum() / target);
    reg.tol = 1e-11;
    const RunResult b = balancekit::Run(prob, reg);
    ASSERT_EQ(b.report.termination, Termination::kConverged);
    const Eigen::MatrixXd ha = ScaledMatrix(prob, a.state).ToDense();
    const Eigen::MatrixXd hb = ScaledMatrix(prob, b.state).ToDense();
    EXPECT_LE((ha - hb).cwiseAbs().maxCoeff(), 1e-3);
  }
}

}  // namespace
}  // namespace balancekit
