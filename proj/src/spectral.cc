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


#include "balancekit/spectral.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "Eigen/Eigenvalues"
#include "Eigen/SparseCholesky"
#include "balancekit/error.h"

namespace balancekit {
namespace {

double DenseFiedler(const Eigen::MatrixXd& l) {
  if (l.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolverNoConvergence,
                "dense symmetric eigensolver failed");
  }
  return std::max(0.0, solver.eigenvalues()[1]);
}

void Orthogonalize(Vector& w, const std::vector<Vector>& basis) {
  // Two passes of classical Gram-Schmidt, plus removal of the constant
  // direction, keep the Krylov basis orthogonal to working precision.
  const double inv_n = 1.0 / static_cast<double>(w.size());
  for (int pass = 0; pass < 2; ++pass) {
    w.array() -= w.sum() * inv_n;
    for (const Vector& b : basis) w -= b.dot(w) * b;
  }
}

// Largest eigenvalue of L^+ on the complement of 1 by Lanczos iteration.
double LanczosFiedler(const SparseSym& l) {
  const int n = static_cast<int>(l.rows());
  const SparseSym grounded = l.topLeftCorner(n - 1, n - 1);
  Eigen::SimplicialLDLT<SparseSym> ldlt(grounded);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolverNoConvergence,
                "factorization of the grounded Laplacian failed");
  }
  auto apply = [&](const Vector& x) {
    Vector y(n);
    y.head(n - 1) = ldlt.solve(x.head(n - 1));
    y[n - 1] = 0.0;
    y.array() -= y.mean();
    return y;
  };

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = normal(rng);
  q.array() -= q.mean();
  q.normalize();

  const int max_steps = std::min(n - 1, 600);
  std::vector<Vector> basis;
  std::vector<double> alpha, beta;
  for (int k = 0; k < max_steps; ++k) {
    basis.push_back(q);
    Vector w = apply(q);
    alpha.push_back(q.dot(w));
    Orthogonalize(w, basis);
    const double b = w.norm();

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t);
    const double theta = ritz.eigenvalues()[m - 1];
    const double residual = std::abs(b * ritz.eigenvectors()(m - 1, m - 1));
    if (theta > 0.0 && (residual <= 1e-11 * theta || b <= 1e-14 * theta)) {
      return 1.0 / theta;
    }
    if (k + 1 == max_steps) break;
    beta.push_back(b);
    q = w / b;
  }
  throw Error(ErrorCode::kEigensolverNoConvergence,
              "Lanczos did not converge in " + std::to_string(max_steps) +
                  " steps");
}

bool InRange(double x, double lo, double hi, double slack) {
  return x >= lo * (1.0 - slack) && x <= hi * (1.0 + slack);
}

void RequireSolved(const BalancingProblem& problem, const ScalingState& solved,
                   double rel_tol) {
  const MarginalSnapshot snap = Marginals(problem, solved);
  const double limit = rel_tol * problem.total_mass();
  if (!(snap.l1_row_err <= limit && snap.l1_col_err <= limit)) {
    throw Error(ErrorCode::kNotConverged,
                "state does not balance the problem (l1 errors " +
                    std::to_string(snap.l1_row_err) + ", " +
                    std::to_string(snap.l1_col_err) + ")");
  }
}

double CenteredSup(const ScalingState& s) {
  const Eigen::Index m = s.d0.size();
  const Eigen::Index n = s.d1.size();
  Vector w(m + n);
  w.head(m) = s.d0.array().log();
  w.tail(n) = -s.d1.array().log();
  return (w.array() - w.mean()).abs().maxCoeff();
}

}  // namespace

BipartiteLaplacian BuildBipartiteLaplacian(const NonnegMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  const Vector rows = a.RowSums();
  const Vector cols = a.ColSums();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * a.nonzeros() + n + m);
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, rows[i]);
  for (int j = 0; j < m; ++j) t.emplace_back(n + j, n + j, cols[j]);
  a.ForEachNonzero([&](int i, int j, double v) {
    t.emplace_back(i, n + j, -v);
    t.emplace_back(n + j, i, -v);
  });
  BipartiteLaplacian out;
  out.n_rows = n;
  out.n_cols = m;
  out.matrix.resize(n + m, n + m);
  out.matrix.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseSym ComparisonLaplacian(const NonnegMatrix& a) {
  const SparseSym at = a.storage().transpose();
  SparseSym gram = (at * SparseSym(a.storage())).pruned();
  const int m = a.cols();
  Vector deg = Vector::Zero(m);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < gram.outerSize(); ++k) {
    for (SparseSym::InnerIterator it(gram, k); it; ++it) {
      if (it.row() == it.col()) continue;
      t.emplace_back(it.row(), it.col(), -it.value());
      deg[it.col()] += it.value();
    }
  }
  for (int j = 0; j < m; ++j) t.emplace_back(j, j, deg[j]);
  SparseSym l(m, m);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

bool PatternConnected(const SparseSym& laplacian) {
  const int n = static_cast<int>(laplacian.rows());
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop();
    for (SparseSym::InnerIterator it(laplacian, k); it; ++it) {
      const int nb = static_cast<int>(it.row());
      if (nb != k && it.value() != 0.0 && !seen[nb]) {
        seen[nb] = 1;
        ++reached;
        frontier.push(nb);
      }
    }
  }
  return reached == n;
}

double FiedlerEigenvalue(const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() <= kDenseEigenLimit) return DenseFiedler(laplacian);
  return FiedlerEigenvalue(SparseSym(laplacian.sparseView()));
}

double FiedlerEigenvalue(const SparseSym& laplacian) {
  if (laplacian.rows() <= kDenseEigenLimit) {
    return DenseFiedler(Eigen::MatrixXd(laplacian));
  }
  if (!PatternConnected(laplacian)) return 0.0;
  return LanczosFiedler(laplacian);
}

Eigen::MatrixXd PotentialHessian(const BalancingProblem& problem,
                                 const ScalingState& state) {
  ValidateState(problem, state);
  const int n = problem.rows();
  const int m = problem.cols();
  const Vector u = state.d0.array().log();
  const Vector v = -state.d1.array().log();
  // Second derivatives of sum_ij A_ij exp(u_j - v_i); the linear terms of the
  // potential do not contribute.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + m, n + m);
  problem.a().ForEachNonzero([&](int i, int j, double a) {
    const double e = a * std::exp(u[j] - v[i]);
    h(i, i) += e;
    h(n + j, n + j) += e;
    h(i, n + j) -= e;
    h(n + j, i) -= e;
  });
  return h;
}

GlobalRateReport GlobalRateBound(const BalancingProblem& problem,
                                 const Trajectory& trajectory) {
  if (trajectory.states.empty()) {
    throw Error(ErrorCode::kInsufficientHistory, "empty trajectory");
  }
  GlobalRateReport out;
  out.l0 = problem.a().ColSums().maxCoeff();
  out.l1 = problem.a().RowSums().maxCoeff();
  out.fiedler = FiedlerEigenvalue(BuildBipartiteLaplacian(problem.a()).matrix);
  double b = 0.0;
  const auto& states = trajectory.states;
  for (size_t k = 0; k < states.size(); ++k) {
    b = std::max(b, CenteredSup(states[k]));
    if (k + 1 < states.size()) {
      b = std::max(b, CenteredSup(HalfStepRow(problem, states[k])));
    }
  }
  out.b_empirical = b;
  out.global_rate_bound =
      1.0 - std::exp(-4.0 * b) * out.fiedler / std::min(out.l0, out.l1);
  return out;
}

AsymptoticRateReport AsymptoticRate(const BalancingProblem& problem,
                                    const ScalingState& solved,
                                    double rel_tol) {
  RequireSolved(problem, solved, rel_tol);
  const Eigen::MatrixXd a_hat = ScaledMatrix(problem, solved).ToDense();
  const Vector sp = problem.p().array().sqrt();
  const Vector sq = problem.q().array().sqrt();
  const Eigen::MatrixXd a_tilde =
      sp.cwiseInverse().asDiagonal() * a_hat * sq.cwiseInverse().asDiagonal();
  const bool rows_smaller = a_tilde.rows() <= a_tilde.cols();
  const Eigen::MatrixXd gram = rows_smaller
                                   ? Eigen::MatrixXd(a_tilde * a_tilde.transpose())
                                   : Eigen::MatrixXd(a_tilde.transpose() * a_tilde);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolverNoConvergence,
                "Gram matrix eigensolver failed");
  }
  const Eigen::Index k = gram.rows();
  AsymptoticRateReport out;
  out.top_eigenvalue = solver.eigenvalues()[k - 1];
  out.rate = k >= 2 ? std::max(0.0, solver.eigenvalues()[k - 2]) : 0.0;
  const Vector top = solver.eigenvectors().col(k - 1);
  const Vector expected = (rows_smaller ? sp : sq).normalized();
  out.top_vector_error =
      std::min((top - expected).norm(), (top + expected).norm());
  out.top_pair_ok = std::abs(out.top_eigenvalue - 1.0) <= 1e-8 &&
                    out.top_vector_error <= 1e-8;
  return out;
}

ComplexityConstants ComputeComplexityConstants(const BalancingProblem& problem,
                                               const ScalingState& solved,
                                               double rel_tol) {
  RequireSolved(problem, solved, rel_tol);
  const double fiedler =
      FiedlerEigenvalue(BuildBipartiteLaplacian(problem.a()).matrix);
  return ComputeComplexityConstants(problem, solved, fiedler, rel_tol);
}

ComplexityConstants ComputeComplexityConstants(const BalancingProblem& problem,
                                               const ScalingState& solved,
                                               double fiedler,
                                               double rel_tol) {
  RequireSolved(problem, solved, rel_tol);
  const double max0 = solved.d0.maxCoeff();
  const double min0 = solved.d0.minCoeff();
  const double max1 = solved.d1.maxCoeff();
  const double min1 = solved.d1.minCoeff();
  ComplexityConstants out;
  out.fiedler = fiedler;
  out.c_constant =
      std::max({max0 / min0, 1.0 / (min0 * min1), max0 * max1});
  const double scale =
      std::min(problem.q().maxCoeff(), problem.p().maxCoeff());
  out.xi_constant = fiedler > 0.0
                        ? out.c_constant * out.c_constant * scale / fiedler
                        : std::numeric_limits<double>::infinity();
  return out;
}

EnvelopeCheck SkbndEnvelopeCheck(const BalancingProblem& problem,
                                 const Trajectory& trajectory,
                                 const ScalingState& solved, double rel_tol) {
  if (trajectory.states.empty()) {
    throw Error(ErrorCode::kInsufficientHistory, "empty trajectory");
  }
  if (!trajectory.starts_from_ones) {
    throw Error(ErrorCode::kNotApplicable,
                "the envelope only holds for runs started at d0 = 1");
  }
  RequireSolved(problem, solved, rel_tol);
  constexpr double kSlack = 1e-9;
  const double max0 = solved.d0.maxCoeff();
  const double min0 = solved.d0.minCoeff();
  EnvelopeCheck out;
  for (const ScalingState& s : trajectory.states) {
    for (Eigen::Index j = 0; j < s.d0.size(); ++j) {
      if (!InRange(s.d0[j], solved.d0[j] / max0, solved.d0[j] / min0,
                   kSlack)) {
        out.holds = false;
        out.first_violation = {s.iteration, true, static_cast<int>(j)};
        return out;
      }
    }
    if (s.iteration == 0) continue;
    for (Eigen::Index i = 0; i < s.d1.size(); ++i) {
      if (!InRange(s.d1[i], min0 * solved.d1[i], max0 * solved.d1[i],
                   kSlack)) {
        out.holds = false;
        out.first_violation = {s.iteration, false, static_cast<int>(i)};
        return out;
      }
    }
  }
  return out;
}

}  // namespace balancekit
