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


// Graph Laplacians, algebraic connectivity and the convergence-rate constants
// of Sinkhorn's algorithm.
//
// Node order of the bipartite Laplacian is rows first, then columns. The log
// scalings are u = log d0 (columns) and v = -log d1 (rows); the Hessian of the
// potential is reported in the same (v, u) order.

#ifndef BALANCEKIT_SPECTRAL_H_
#define BALANCEKIT_SPECTRAL_H_

#include <optional>

#include "Eigen/Core"
#include "Eigen/SparseCore"
#include "balancekit/balancing.h"
#include "balancekit/core.h"

namespace balancekit {

using SparseSym = Eigen::SparseMatrix<double>;

struct BipartiteLaplacian {
  int n_rows = 0;
  int n_cols = 0;
  SparseSym matrix;  // [[D(A 1), -A], [-A^T, D(A^T 1)]]

  int size() const { return n_rows + n_cols; }
};

BipartiteLaplacian BuildBipartiteLaplacian(const NonnegMatrix& a);

// Laplacian of the item co-occurrence graph whose adjacency is A^T A with its
// diagonal removed.
SparseSym ComparisonLaplacian(const NonnegMatrix& a);

// Matrices at or below this size use a dense eigensolver.
inline constexpr int kDenseEigenLimit = 200;

// Second smallest eigenvalue of a symmetric PSD matrix with 1 in its null
// space. Larger inputs use Lanczos on the pseudo-inverse restricted to the
// complement of 1 (a grounded sparse LDL^T factorization provides the
// inverse). Throws kEigensolverNoConvergence.
double FiedlerEigenvalue(const SparseSym& laplacian);
double FiedlerEigenvalue(const Eigen::MatrixXd& laplacian);

// True iff the off-diagonal pattern of the matrix is a connected graph.
bool PatternConnected(const SparseSym& laplacian);

// Hessian of the reparameterized potential at (u, v) = (log d0, -log d1).
Eigen::MatrixXd PotentialHessian(const BalancingProblem& problem,
                                 const ScalingState& state);

struct GlobalRateReport {
  double fiedler = 0.0;
  double l0 = 0.0;  // max column sum of A
  double l1 = 0.0;  // max row sum of A
  // Largest sup-norm of the centered log scalings over the trajectory,
  // including the intermediate states after each row half-step.
  double b_empirical = 0.0;
  double global_rate_bound = 1.0;  // 1 - exp(-4 b) fiedler / min(l0, l1)
};

// Throws kInsufficientHistory for an empty trajectory.
GlobalRateReport GlobalRateBound(const BalancingProblem& problem,
                                 const Trajectory& trajectory);

struct AsymptoticRateReport {
  double rate = 0.0;           // second largest eigenvalue of the Gram matrix
  double top_eigenvalue = 0.0;
  double top_vector_error = 0.0;  // distance to sqrt(p) (or sqrt(q)), unit norm
  bool top_pair_ok = false;       // both within 1e-8
};

// Requires ||r - p||_1 and ||c - q||_1 below rel_tol * sum(p); throws
// kNotConverged otherwise.
AsymptoticRateReport AsymptoticRate(const BalancingProblem& problem,
                                    const ScalingState& solved,
                                    double rel_tol = 1e-10);

struct ComplexityConstants {
  double c_constant = 0.0;
  double xi_constant = 0.0;
  double fiedler = 0.0;
};

ComplexityConstants ComputeComplexityConstants(const BalancingProblem& problem,
                                               const ScalingState& solved,
                                               double rel_tol = 1e-8);
// Same constants with a precomputed Fiedler eigenvalue.
ComplexityConstants ComputeComplexityConstants(const BalancingProblem& problem,
                                               const ScalingState& solved,
                                               double fiedler, double rel_tol);

struct EnvelopeViolation {
  int t = 0;
  bool in_d0 = true;  // false: the violation is in d1
  int index = 0;
};

struct EnvelopeCheck {
  bool holds = true;
  std::optional<EnvelopeViolation> first_violation;
};

// Checks d0*/max(d0*) <= d0(t) <= d0*/min(d0*) for every recorded state and
// min(d0*) d1* <= d1(t) <= max(d0*) d1* for every state produced by a row
// half-step (t >= 1), with 1e-9 relative slack. Errors: kInsufficientHistory,
// kNotApplicable (trajectory not started at d0 = 1), kNotConverged (solved
// state does not balance the problem).
EnvelopeCheck SkbndEnvelopeCheck(const BalancingProblem& problem,
                                 const Trajectory& trajectory,
                                 const ScalingState& solved,
                                 double rel_tol = 1e-8);

struct RateReport {
  GlobalRateReport global;
  std::optional<AsymptoticRateReport> asymptotic;
  std::optional<ComplexityConstants> complexity;
};

}  // namespace balancekit

#endif  // BALANCEKIT_SPECTRAL_H_
