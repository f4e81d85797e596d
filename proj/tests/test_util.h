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


// Instance generators and brute-force oracles shared by the tests. Nothing
// here calls into the code under test beyond the data types.

#ifndef BALANCEKIT_TESTS_TEST_UTIL_H_
#define BALANCEKIT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "balancekit/choice_data.h"
#include "balancekit/core.h"
#include "balancekit/error.h"

namespace balancekit::testing {

// Code of the balancekit::Error thrown by fn, if any.
template <typename Fn>
std::optional<ErrorCode> CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Eigen::MatrixXd RandomPositiveDense(int n, int m, std::mt19937_64& rng,
                                           double lo = 0.1, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = u(rng);
  }
  return a;
}

// Dense matrix with roughly `zeros` fraction of zeros, no empty row/column.
inline Eigen::MatrixXd RandomSparseDense(int n, int m, double zeros,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::bernoulli_distribution drop(zeros);
  while (true) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (!drop(rng)) a(i, j) = u(rng);
      }
    }
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && a.row(i).sum() > 0;
    for (int j = 0; j < m; ++j) ok = ok && a.col(j).sum() > 0;
    if (ok) return a;
  }
}

inline Vector RandomPositiveVector(int n, std::mt19937_64& rng, double lo = 0.5,
                                   double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline BalancingProblem RandomPositiveProblem(int n, int m,
                                              std::mt19937_64& rng) {
  const Eigen::MatrixXd a = RandomPositiveDense(n, m, rng);
  Vector p = RandomPositiveVector(n, rng);
  Vector q = RandomPositiveVector(m, rng);
  q *= p.sum() / q.sum();
  return BuildProblem(NonnegMatrix::FromDense(a), p, q);
}

// Sparse A together with marginals read off another matrix with the same
// pattern, which guarantees a direct scaling exists.
inline BalancingProblem RandomFeasibleSparseProblem(int n, int m, double zeros,
                                                    std::mt19937_64& rng) {
  const Eigen::MatrixXd a = RandomSparseDense(n, m, zeros, rng);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  Eigen::MatrixXd b = a;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (b(i, j) != 0.0) b(i, j) = u(rng);
    }
  }
  const Vector p = b.rowwise().sum();
  Vector q = b.colwise().sum().transpose();
  q *= p.sum() / q.sum();
  return BuildProblem(NonnegMatrix::FromDense(a), p, q);
}

// Sums over index subsets encoded as bitmasks.
inline double MaskSum(const Vector& v, unsigned mask) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    if (mask >> i & 1u) s += v[i];
  }
  return s;
}

struct BruteExistence {
  bool weak = true;
  bool strong = true;
};

// Enumerates every (N, M) with no entry of A in (rows outside N) x M.
inline BruteExistence BruteForceExistence(const Eigen::MatrixXd& a,
                                          const Vector& p, const Vector& q,
                                          double tol = 1e-9) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  BruteExistence out;
  for (unsigned nm = 0; nm < (1u << n); ++nm) {
    for (unsigned mm = 0; mm < (1u << m); ++mm) {
      bool outside_clear = true;
      bool inside_cross = false;  // some A_ij > 0, i in N, j not in M
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
          if (a(i, j) == 0.0) continue;
          const bool in_n = nm >> i & 1u;
          const bool in_m = mm >> j & 1u;
          if (!in_n && in_m) outside_clear = false;
          if (in_n && !in_m) inside_cross = true;
        }
      }
      if (!outside_clear) continue;
      const double pn = MaskSum(p, nm);
      const double qm = MaskSum(q, mm);
      if (pn < qm - tol) out.weak = false;
      if (std::abs(pn - qm) <= tol && inside_cross) out.strong = false;
    }
  }
  out.strong = out.strong && out.weak;
  return out;
}

// A is decomposable iff some proper nonempty node subset has no edge leaving.
inline bool BruteForceConnected(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const int total = n + m;
  for (unsigned s = 1; s + 1 < (1u << total); ++s) {
    bool crossing = false;
    for (int i = 0; i < n && !crossing; ++i) {
      for (int j = 0; j < m && !crossing; ++j) {
        if (a(i, j) == 0.0) continue;
        if ((s >> i & 1u) != (s >> (n + j) & 1u)) crossing = true;
      }
    }
    if (!crossing) return false;
  }
  return true;
}

// Random choice observations over m items drawn from a Luce model with the
// given scores; sets are uniform random subsets of size 2..max_set.
inline std::vector<ChoiceObservation> SampleLuce(const Vector& scores,
                                                 int n_obs, int max_set,
                                                 std::mt19937_64& rng) {
  const int m = static_cast<int>(scores.size());
  std::vector<int> items(m);
  for (int j = 0; j < m; ++j) items[j] = j;
  std::uniform_int_distribution<int> size_dist(2, std::min(max_set, m));
  std::vector<ChoiceObservation> obs;
  for (int k = 0; k < n_obs; ++k) {
    std::shuffle(items.begin(), items.end(), rng);
    const int size = size_dist(rng);
    std::vector<double> w;
    ChoiceObservation o;
    for (int t = 0; t < size; ++t) {
      o.choice_set.push_back(std::to_string(items[t]));
      w.push_back(scores[items[t]]);
    }
    std::discrete_distribution<int> pick(w.begin(), w.end());
    o.chosen = o.choice_set[pick(rng)];
    obs.push_back(std::move(o));
  }
  return obs;
}

// Assumption-1 check by enumerating every item bipartition (M, M^c): some
// observation must choose from M^c while offering an item of M.
inline bool BruteForceStronglyConnected(const ReducedDataset& d) {
  const int m = d.num_items();
  for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
    bool cross = false;
    for (int i = 0; i < d.num_sets() && !cross; ++i) {
      bool offers_m = false;
      for (int j : d.sets[i]) offers_m = offers_m || (mask >> j & 1u);
      if (!offers_m) continue;
      for (size_t k = 0; k < d.sets[i].size(); ++k) {
        if (d.set_wins[i][k] > 0.0 && !(mask >> d.sets[i][k] & 1u)) {
          cross = true;
        }
      }
    }
    if (!cross) return false;
  }
  return true;
}

// Maximizes sum_j W_j theta_j - sum_i R_i log sum_{k in S_i} exp(theta_k)
// over the hyperplane sum(theta) = 0 by projected gradient ascent with
// Barzilai-Borwein steps and an Armijo safeguard. Returns simplex scores.
inline Vector GradientAscentMle(const ReducedDataset& d, int max_steps = 200000,
                                double grad_tol = 1e-12) {
  const int m = d.num_items();
  auto value_and_grad = [&](const Vector& theta, Vector* grad) {
    double f = d.wins.dot(theta);
    *grad = d.wins;
    for (int i = 0; i < d.num_sets(); ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (int k : d.sets[i]) top = std::max(top, theta[k]);
      double z = 0.0;
      for (int k : d.sets[i]) z += std::exp(theta[k] - top);
      f -= d.multiplicity[i] * (top + std::log(z));
      for (int k : d.sets[i]) {
        (*grad)[k] -= d.multiplicity[i] * std::exp(theta[k] - top) / z;
      }
    }
    grad->array() -= grad->mean();  // projection onto the hyperplane
    return f;
  };
  Vector theta = Vector::Zero(m);
  Vector grad;
  double f = value_and_grad(theta, &grad);
  double step = 1.0 / std::max(1.0, d.multiplicity.sum());
  Vector prev_theta = theta, prev_grad = grad;
  for (int it = 0; it < max_steps; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() <= grad_tol * d.multiplicity.sum()) {
      break;
    }
    if (it > 0) {
      const Vector s = theta - prev_theta;
      const Vector y = grad - prev_grad;
      const double sy = s.dot(y);
      if (sy < 0.0) step = -s.squaredNorm() / sy;  // ascent: y.s < 0
    }
    prev_theta = theta;
    prev_grad = grad;
    Vector trial_grad;
    double t = step;
    while (true) {
      const Vector trial = theta + t * grad;
      const double ft = value_and_grad(trial, &trial_grad);
      if (ft >= f + 1e-4 * t * grad.squaredNorm() - 1e-15 * std::abs(f) ||
          t < 1e-30) {
        theta = trial;
        f = ft;
        grad = trial_grad;
        break;
      }
      t *= 0.5;
    }
  }
  Vector s = theta.array().exp();
  return s / s.sum();
}

// Minimizes the dual potential over (u, v) in the complement of the constant
// vector by damped Newton steps. Returns (d0, d1) packed as [d0; d1].
inline Vector NewtonPotentialMinimizer(const Eigen::MatrixXd& a,
                                       const Vector& p, const Vector& q) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  // x = [v; u]; g = sum A_ij exp(u_j - v_i) + p.v - q.u
  auto eval = [&](const Vector& x, Vector* grad, Eigen::MatrixXd* hess) {
    const Vector v = x.head(n);
    const Vector u = x.tail(m);
    double g = p.dot(v) - q.dot(u);
    if (grad) {
      grad->resize(n + m);
      grad->head(n) = p;
      grad->tail(m) = -q;
    }
    if (hess) hess->setZero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (a(i, j) == 0.0) continue;
        const double e = a(i, j) * std::exp(u[j] - v[i]);
        g += e;
        if (grad) {
          (*grad)[i] -= e;
          (*grad)[n + j] += e;
        }
        if (hess) {
          (*hess)(i, i) += e;
          (*hess)(n + j, n + j) += e;
          (*hess)(i, n + j) -= e;
          (*hess)(n + j, i) -= e;
        }
      }
    }
    return g;
  };
  Vector x = Vector::Zero(n + m);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n + m, n + m);
  for (int it = 0; it < 200; ++it) {
    Vector grad;
    Eigen::MatrixXd hess;
    const double g = eval(x, &grad, &hess);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-13 * p.sum()) break;
    const Vector dir = -(hess + ones).ldlt().solve(grad);
    double t = 1.0;
    while (eval(x + t * dir, nullptr, nullptr) > g + 1e-4 * t * grad.dot(dir) &&
           t > 1e-12) {
      t *= 0.5;
    }
    x += t * dir;
    x.array() -= x.mean();
  }
  Vector out(n + m);
  out.head(m) = x.tail(m).array().exp();     // d0 = exp(u)
  out.tail(n) = (-x.head(n)).array().exp();  // d1 = exp(-v)
  return out;
}

}  // namespace balancekit::testing

#endif  // BALANCEKIT_TESTS_TEST_UTIL_H_
