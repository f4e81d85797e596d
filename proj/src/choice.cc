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


#include "balancekit/choice.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "balancekit/error.h"
#include "balancekit/feasibility.h"

namespace balancekit {
namespace {

// sum_{k in S_i} s_k for every set.
Vector SetMass(const ReducedDataset& reduced, const Vector& s) {
  Vector mass(reduced.num_sets());
  for (int i = 0; i < reduced.num_sets(); ++i) {
    double t = 0.0;
    for (int k : reduced.sets[i]) t += s[k];
    mass[i] = t;
  }
  return mass;
}

// Expected wins sum_{i : j in S_i} R_i s_j / sum_{k in S_i} s_k.
Vector ExpectedWins(const ReducedDataset& reduced, const Vector& s) {
  const Vector mass = SetMass(reduced, s);
  Vector out = Vector::Zero(reduced.num_items());
  for (int i = 0; i < reduced.num_sets(); ++i) {
    for (int j : reduced.sets[i]) {
      out[j] += reduced.multiplicity[i] * s[j] / mass[i];
    }
  }
  return out;
}

LuceEstimate Finish(const ReducedDataset& reduced, const RunResult& run,
                    const EstimateConfig& config) {
  LuceEstimate est;
  est.items = reduced.items;
  est.normalization = config.normalization;
  est.raw_sum = run.state.d0.sum();
  est.scores = NormalizeScores(run.state.d0, config.normalization);
  est.log_likelihood = LogLikelihood(reduced, est.scores);
  est.iterations = run.report.iterations;
  est.termination = run.report.termination;
  return est;
}

SinkhornConfig BalancingConfig(const BalancingProblem& problem,
                               const EstimateConfig& config) {
  SinkhornConfig sc;
  sc.variant = config.variant;
  sc.max_iterations = config.max_iterations;
  sc.tol = config.tol * problem.total_mass();
  return sc;
}

}  // namespace

std::string_view NormalizationName(ScoreNormalization n) {
  return n == ScoreNormalization::kSimplex ? "simplex" : "sum-m";
}

double LogLikelihood(const ReducedDataset& reduced, const Vector& s) {
  double ll = 0.0;
  for (int j = 0; j < reduced.num_items(); ++j) {
    if (reduced.wins[j] != 0.0) ll += reduced.wins[j] * std::log(s[j]);
  }
  const Vector mass = SetMass(reduced, s);
  for (int i = 0; i < reduced.num_sets(); ++i) {
    ll -= reduced.multiplicity[i] * std::log(mass[i]);
  }
  return ll;
}

double FocResidual(const ReducedDataset& reduced, const Vector& s) {
  const Vector simplex = s / s.sum();
  return (reduced.wins - ExpectedWins(reduced, simplex)).cwiseAbs().maxCoeff();
}

double RegularizedFocResidual(const ReducedDataset& reduced, const Vector& s,
                              double alpha, double beta) {
  const Vector lhs = reduced.wins.array() + (alpha - 1.0);
  const Vector rhs = ExpectedWins(reduced, s) + beta * s;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

Vector NormalizeScores(const Vector& s, ScoreNormalization normalization) {
  const double target = normalization == ScoreNormalization::kSimplex
                            ? 1.0
                            : static_cast<double>(s.size());
  return s * (target / s.sum());
}

LuceEstimate EstimateMle(const ReducedDataset& reduced,
                         const EstimateConfig& config) {
  for (int j = 0; j < reduced.num_items(); ++j) {
    if (!(reduced.wins[j] > 0.0)) {
      throw Error(ErrorCode::kInfeasibleDataset,
                  "item '" + reduced.items[j] +
                      "' is never chosen; use the regularized estimator or "
                      "data augmentation");
    }
  }
  if (!CheckChoiceConnectivity(reduced).strong) {
    throw Error(ErrorCode::kInfeasibleDataset,
                "the comparison graph is not strongly connected; use the "
                "regularized estimator or data augmentation");
  }
  const BalancingProblem problem = ToBalancingProblem(reduced);
  const RunResult run = Run(problem, BalancingConfig(problem, config));
  if (run.report.termination != Termination::kConverged) {
    throw Error(ErrorCode::kNotConverged,
                "Sinkhorn stopped with " +
                    std::string(TerminationName(run.report.termination)) +
                    " after " + std::to_string(run.report.iterations) +
                    " iterations");
  }
  LuceEstimate est = Finish(reduced, run, config);
  est.foc_residual = FocResidual(reduced, est.scores);
  est.converged = est.foc_residual <= config.foc_tol;
  return est;
}

LuceEstimate EstimateRegularized(const ReducedDataset& reduced, double alpha,
                                 double beta, const EstimateConfig& config) {
  if (!(alpha > 1.0 && beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "regularization needs alpha > 1 and beta > 0");
  }
  const BalancingProblem problem = ToBalancingProblem(reduced);
  SinkhornConfig sc = BalancingConfig(problem, config);
  sc.variant = Variant::kRegularized;
  sc.alpha = alpha;
  sc.beta = beta;
  const RunResult run = Run(problem, sc);
  LuceEstimate est = Finish(reduced, run, config);
  est.regularized = true;
  est.foc_residual = RegularizedFocResidual(reduced, run.state.d0, alpha, beta);
  est.converged = run.report.termination == Termination::kConverged &&
                  est.foc_residual <= config.foc_tol;
  return est;
}

ReducedDataset AugmentData(const ReducedDataset& reduced, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "augmentation needs eps > 0");
  }
  const int m = reduced.num_items();
  std::vector<int> full(m);
  std::iota(full.begin(), full.end(), 0);
  ReducedDataset out = reduced;
  auto it = std::lower_bound(out.sets.begin(), out.sets.end(), full);
  const int pos = static_cast<int>(it - out.sets.begin());
  if (it == out.sets.end() || *it != full) {
    out.sets.insert(it, full);
    out.set_wins.insert(out.set_wins.begin() + pos,
                        std::vector<double>(m, 0.0));
    Vector mult(out.multiplicity.size() + 1);
    mult << out.multiplicity.head(pos), 0.0,
        out.multiplicity.tail(out.multiplicity.size() - pos);
    out.multiplicity = mult;
  }
  out.multiplicity[pos] += m * eps;
  for (double& w : out.set_wins[pos]) w += eps;
  out.wins.array() += eps;
  return out;
}

LuceEstimate EstimateAugmented(const ReducedDataset& reduced, double eps,
                               const EstimateConfig& config) {
  return EstimateMle(AugmentData(reduced, eps), config);
}

Vector ScalingIterationUpdate(const ReducedDataset& reduced, const Vector& s) {
  const Vector mass = SetMass(reduced, s);
  Vector denom = Vector::Zero(reduced.num_items());
  for (int i = 0; i < reduced.num_sets(); ++i) {
    const double ratio = reduced.multiplicity[i] / mass[i];
    for (int j : reduced.sets[i]) denom[j] += ratio;
  }
  return reduced.wins.cwiseQuotient(denom);
}

Vector MmUpdate(const std::vector<std::vector<int>>& rankings, int num_items,
                const Vector& s) {
  Vector w = Vector::Zero(num_items);
  Vector denom = Vector::Zero(num_items);
  for (const auto& r : rankings) {
    const int l = static_cast<int>(r.size());
    // Tail sums sum_{j' >= j} s_{a_j'}.
    std::vector<double> tail(l + 1, 0.0);
    for (int j = l - 1; j >= 0; --j) tail[j] = tail[j + 1] + s[r[j]];
    for (int j = 0; j + 1 < l; ++j) w[r[j]] += 1.0;
    for (int pos = 0; pos < l; ++pos) {
      // Item r[pos] belongs to the stages j = 0, ..., min(pos, l - 2).
      double d = 0.0;
      for (int j = 0; j <= std::min(pos, l - 2); ++j) d += 1.0 / tail[j];
      denom[r[pos]] += d;
    }
  }
  return w.cwiseQuotient(denom);
}

Vector PairwiseUpdate(const Eigen::MatrixXd& wins, const Vector& s) {
  const Eigen::Index m = wins.rows();
  Vector out(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double d = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == j) continue;
      const double c = wins(j, k) + wins(k, j);
      if (c != 0.0) d += c / (s[j] + s[k]);
    }
    out[j] = wins.row(j).sum() / d;
  }
  return out;
}

ReducedDataset PairwiseDataset(const Eigen::MatrixXd& wins) {
  const int m = static_cast<int>(wins.rows());
  ReducedDataset out;
  for (int j = 0; j < m; ++j) out.items.push_back(std::to_string(j));
  out.wins = wins.rowwise().sum();
  std::vector<double> mult;
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      const double c = wins(j, k) + wins(k, j);
      if (c == 0.0) continue;
      out.sets.push_back({j, k});
      out.set_wins.push_back({wins(j, k), wins(k, j)});
      mult.push_back(c);
    }
  }
  out.multiplicity = Eigen::Map<Vector>(mult.data(), mult.size());
  return out;
}

Vector TransitionGraph::InCounts() const {
  Vector c = Vector::Zero(num_nodes);
  for (const Edge& e : edges) c[e.to] += e.count;
  return c;
}

Vector TransitionGraph::OutCounts() const {
  Vector c = Vector::Zero(num_nodes);
  for (const Edge& e : edges) c[e.from] += e.count;
  return c;
}

namespace {

// Deduplicated neighbour lists; throws for nodes nobody can move to.
void Neighbourhoods(const TransitionGraph& graph,
                    std::vector<std::vector<int>>* out_nb,
                    std::vector<std::vector<int>>* in_nb) {
  out_nb->assign(graph.num_nodes, {});
  in_nb->assign(graph.num_nodes, {});
  for (const auto& e : graph.edges) {
    if (e.from < 0 || e.from >= graph.num_nodes || e.to < 0 ||
        e.to >= graph.num_nodes || e.from == e.to || e.count < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "malformed transition edge");
    }
    (*out_nb)[e.from].push_back(e.to);
    (*in_nb)[e.to].push_back(e.from);
  }
  for (auto* lists : {out_nb, in_nb}) {
    for (auto& l : *lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
  for (int k = 0; k < graph.num_nodes; ++k) {
    if ((*in_nb)[k].empty()) {
      throw Error(ErrorCode::kIsolatedNode,
                  "node " + std::to_string(k) + " has no incoming edge");
    }
  }
}

}  // namespace

Vector ChoiceRankUpdate(const TransitionGraph& graph, const Vector& s) {
  std::vector<std::vector<int>> out_nb, in_nb;
  Neighbourhoods(graph, &out_nb, &in_nb);
  const Vector c_out = graph.OutCounts();
  const Vector c_in = graph.InCounts();
  Vector gamma = Vector::Zero(graph.num_nodes);
  for (int j = 0; j < graph.num_nodes; ++j) {
    if (out_nb[j].empty()) continue;
    double mass = 0.0;
    for (int k : out_nb[j]) mass += s[k];
    gamma[j] = c_out[j] / mass;
  }
  Vector next(graph.num_nodes);
  for (int k = 0; k < graph.num_nodes; ++k) {
    double d = 0.0;
    for (int j : in_nb[k]) d += gamma[j];
    next[k] = c_in[k] / d;
  }
  return next;
}

ReducedDataset ChoiceRankDataset(const TransitionGraph& graph) {
  std::vector<std::vector<int>> out_nb, in_nb;
  Neighbourhoods(graph, &out_nb, &in_nb);
  std::vector<std::map<int, double>> counts(graph.num_nodes);
  for (const auto& e : graph.edges) counts[e.from][e.to] += e.count;
  // Nodes sharing an out-neighbourhood pool into one set.
  std::map<std::vector<int>, std::pair<double, std::map<int, double>>> groups;
  for (int j = 0; j < graph.num_nodes; ++j) {
    if (out_nb[j].empty()) continue;
    auto& g = groups[out_nb[j]];
    for (const auto& [k, c] : counts[j]) {
      g.first += c;
      g.second[k] += c;
    }
  }
  ReducedDataset out;
  for (int k = 0; k < graph.num_nodes; ++k) {
    out.items.push_back(std::to_string(k));
  }
  out.wins = graph.InCounts();
  std::vector<double> mult;
  for (const auto& [set, g] : groups) {
    if (!(g.first > 0.0)) continue;  // edges that were never traversed
    out.sets.push_back(set);
    mult.push_back(g.first);
    std::vector<double> per_item;
    for (int k : set) {
      auto it = g.second.find(k);
      per_item.push_back(it == g.second.end() ? 0.0 : it->second);
    }
    out.set_wins.push_back(std::move(per_item));
  }
  out.multiplicity = Eigen::Map<Vector>(mult.data(), mult.size());
  return out;
}

}  // namespace balancekit
