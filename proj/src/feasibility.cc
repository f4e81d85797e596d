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


#include "balancekit/feasibility.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>

#include "balancekit/error.h"

namespace balancekit {
namespace {

// Dinic's algorithm on an adjacency-list network. Edge k and k ^ 1 are a
// forward/backward pair.
template <typename Cap>
class FlowNetwork {
 public:
  FlowNetwork(int num_nodes, Cap eps)
      : adj_(num_nodes), level_(num_nodes), next_(num_nodes), eps_(eps) {}

  int AddEdge(int from, int to, Cap cap) {
    const int id = static_cast<int>(to_.size());
    to_.push_back(to);
    cap_.push_back(cap);
    adj_[from].push_back(id);
    to_.push_back(from);
    cap_.push_back(Cap(0));
    adj_[to].push_back(id + 1);
    original_.push_back(cap);
    original_.push_back(Cap(0));
    return id;
  }

  Cap MaxFlow(int s, int t) {
    Cap total = 0;
    while (Bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const Cap pushed = Dfs(s, t, std::numeric_limits<Cap>::max());
        if (pushed <= eps_) break;
        total += pushed;
      }
    }
    return total;
  }

  Cap Flow(int edge) const { return original_[edge] - cap_[edge]; }
  Cap Residual(int edge) const { return cap_[edge]; }
  int To(int edge) const { return to_[edge]; }
  const std::vector<int>& Edges(int node) const { return adj_[node]; }
  bool Positive(Cap x) const { return x > eps_; }

  std::vector<char> ReachableFrom(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::queue<int> frontier;
    frontier.push(s);
    seen[s] = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int e : adj_[v]) {
        if (Positive(cap_[e]) && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          frontier.push(to_[e]);
        }
      }
    }
    return seen;
  }

 private:
  bool Bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> frontier;
    level_[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int e : adj_[v]) {
        if (Positive(cap_[e]) && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[v] + 1;
          frontier.push(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  Cap Dfs(int v, int t, Cap limit) {
    if (v == t) return limit;
    for (int& k = next_[v]; k < static_cast<int>(adj_[v].size()); ++k) {
      const int e = adj_[v][k];
      const int w = to_[e];
      if (!Positive(cap_[e]) || level_[w] != level_[v] + 1) continue;
      const Cap pushed = Dfs(w, t, std::min(limit, cap_[e]));
      if (Positive(pushed)) {
        cap_[e] -= pushed;
        cap_[e ^ 1] += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> to_;
  std::vector<Cap> cap_;
  std::vector<Cap> original_;
  std::vector<int> level_;
  std::vector<int> next_;
  Cap eps_;
};

bool Integral(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != std::round(v[i]) || std::abs(v[i]) > 9.0e15) return false;
  }
  return true;
}

template <typename Cap>
ExistenceResult SolveExistence(const BalancingProblem& problem,
                               const std::vector<Cap>& p,
                               const std::vector<Cap>& q, Cap eps,
                               Cap slack) {
  const int n = problem.rows();
  const int m = problem.cols();
  const int source = n + m;
  const int sink = n + m + 1;
  const Cap total = std::accumulate(p.begin(), p.end(), Cap(0));
  FlowNetwork<Cap> net(n + m + 2, eps);
  for (int i = 0; i < n; ++i) net.AddEdge(source, i, p[i]);
  for (int j = 0; j < m; ++j) net.AddEdge(n + j, sink, q[j]);
  struct Middle {
    int row, col, edge;
  };
  std::vector<Middle> middle;
  middle.reserve(problem.a().nonzeros());
  problem.a().ForEachNonzero([&](int i, int j, double) {
    middle.push_back({i, j, net.AddEdge(i, n + j, total + 1)});
  });

  const Cap flow = net.MaxFlow(source, sink);
  ExistenceResult out;
  out.weak = flow >= total - slack;
  if (!out.weak) {
    const std::vector<char> s_side = net.ReachableFrom(source);
    Witness w;
    for (int i = 0; i < n; ++i) {
      if (!s_side[i]) w.rows.push_back(i);
    }
    for (int j = 0; j < m; ++j) {
      if (!s_side[n + j]) w.cols.push_back(j);
    }
    for (int i : w.rows) w.row_mass += static_cast<double>(p[i]);
    for (int j : w.cols) w.col_mass += static_cast<double>(q[j]);
    out.witness = std::move(w);
    return out;
  }

  // Residual graph restricted to row/column nodes: row -> col always (the
  // middle capacity never saturates), col -> row when the edge carries flow.
  std::vector<std::vector<int>> graph(n + m);
  for (const Middle& e : middle) {
    graph[e.row].push_back(n + e.col);
    if (net.Positive(net.Flow(e.edge))) graph[n + e.col].push_back(e.row);
  }
  // Tarjan's SCC, iterative.
  std::vector<int> index(n + m, -1), low(n + m, 0), comp(n + m, -1);
  std::vector<int> stack, call;
  std::vector<size_t> child(n + m, 0);
  std::vector<char> on_stack(n + m, 0);
  int counter = 0, n_comp = 0;
  for (int root = 0; root < n + m; ++root) {
    if (index[root] >= 0) continue;
    call.push_back(root);
    while (!call.empty()) {
      const int v = call.back();
      if (index[v] < 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
      }
      if (child[v] < graph[v].size()) {
        const int w = graph[v][child[v]++];
        if (index[w] < 0) {
          call.push_back(w);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call.pop_back();
      if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = n_comp;
        } while (w != v);
        ++n_comp;
      }
    }
  }

  out.strong = true;
  for (const Middle& e : middle) {
    if (net.Positive(net.Flow(e.edge)) || comp[e.row] == comp[n + e.col]) {
      continue;
    }
    out.strong = false;
    // Everything reachable from the column: a closed set whose rows feed only
    // its own columns and whose columns draw only from its own rows.
    std::vector<char> seen(n + m, 0);
    std::queue<int> frontier;
    frontier.push(n + e.col);
    seen[n + e.col] = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : graph[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          frontier.push(w);
        }
      }
    }
    Witness w;
    for (int i = 0; i < n; ++i) {
      if (!seen[i]) w.rows.push_back(i);
    }
    for (int j = 0; j < m; ++j) {
      if (!seen[n + j]) w.cols.push_back(j);
    }
    for (int i : w.rows) w.row_mass += static_cast<double>(p[i]);
    for (int j : w.cols) w.col_mass += static_cast<double>(q[j]);
    w.forced_edge = std::make_pair(e.row, e.col);
    out.witness = std::move(w);
    break;
  }
  return out;
}

// Vertices reachable from start plus vertices that reach it.
bool StronglyConnected(const std::vector<std::vector<int>>& out_edges) {
  const int n = static_cast<int>(out_edges.size());
  if (n <= 1) return true;
  std::vector<std::vector<int>> in_edges(n);
  for (int v = 0; v < n; ++v) {
    for (int w : out_edges[v]) in_edges[w].push_back(v);
  }
  auto covers = [n](const std::vector<std::vector<int>>& g) {
    std::vector<char> seen(n, 0);
    std::vector<int> todo{0};
    seen[0] = 1;
    int count = 1;
    while (!todo.empty()) {
      const int v = todo.back();
      todo.pop_back();
      for (int w : g[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          todo.push_back(w);
        }
      }
    }
    return count == n;
  };
  return covers(out_edges) && covers(in_edges);
}

}  // namespace

std::string_view RegimeName(Regime r) {
  switch (r) {
    case Regime::kDirectScaling: return "direct_scaling";
    case Regime::kLimitScaling: return "limit_scaling";
    case Regime::kInfeasible: return "infeasible";
    case Regime::kNonUnique: return "non_unique";
  }
  return "infeasible";
}

bool CheckUniqueness(const NonnegMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  std::vector<std::vector<int>> g(n + m);
  a.ForEachNonzero([&](int i, int j, double) {
    g[i].push_back(n + j);
    g[n + j].push_back(i);
  });
  return StronglyConnected(g);
}

ExistenceResult CheckExistence(const BalancingProblem& problem) {
  const Vector& p = problem.p();
  const Vector& q = problem.q();
  if (Integral(p) && Integral(q)) {
    std::vector<int64_t> pi(p.size()), qi(q.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) pi[i] = std::llround(p[i]);
    for (Eigen::Index j = 0; j < q.size(); ++j) qi[j] = std::llround(q[j]);
    ExistenceResult r = SolveExistence<int64_t>(problem, pi, qi, 0, 0);
    r.exact_arithmetic = true;
    return r;
  }
  const double total = problem.total_mass();
  std::vector<double> pd(p.data(), p.data() + p.size());
  std::vector<double> qd(q.data(), q.data() + q.size());
  return SolveExistence<double>(problem, pd, qd, 1e-13 * total, 1e-9 * total);
}

FeasibilityVerdict CheckFeasibility(const BalancingProblem& problem) {
  FeasibilityVerdict v;
  v.uniqueness = CheckUniqueness(problem.a());
  ExistenceResult e = CheckExistence(problem);
  v.weak_existence = e.weak;
  v.strong_existence = e.strong;
  v.witness = std::move(e.witness);
  if (!v.weak_existence) {
    v.regime = Regime::kInfeasible;
  } else if (!v.strong_existence) {
    v.regime = Regime::kLimitScaling;
  } else if (!v.uniqueness) {
    v.regime = Regime::kNonUnique;
  } else {
    v.regime = Regime::kDirectScaling;
  }
  return v;
}

bool WitnessHolds(const BalancingProblem& problem, const Witness& witness,
                  bool strong_failure) {
  const int n = problem.rows();
  const int m = problem.cols();
  std::vector<char> in_n(n, 0), in_m(m, 0);
  for (int i : witness.rows) in_n[i] = 1;
  for (int j : witness.cols) in_m[j] = 1;
  bool closed = true;
  problem.a().ForEachNonzero([&](int i, int j, double) {
    if (!in_n[i] && in_m[j]) closed = false;
  });
  if (!closed) return false;
  double pn = 0.0, qm = 0.0;
  for (int i : witness.rows) pn += problem.p()[i];
  for (int j : witness.cols) qm += problem.q()[j];
  const double tol = 1e-9 * problem.total_mass();
  if (!strong_failure) return pn < qm - tol;
  if (!witness.forced_edge) return false;
  const auto [fi, fj] = *witness.forced_edge;
  return std::abs(pn - qm) <= tol && in_n[fi] && !in_m[fj] &&
         problem.a().Coeff(fi, fj) > 0.0;
}

ChoiceConnectivity CheckChoiceConnectivity(const ReducedDataset& reduced) {
  if (reduced.num_sets() == 0 || reduced.num_items() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "no choice sets");
  }
  const int m = reduced.num_items();
  std::vector<std::vector<int>> directed(m), undirected(m);
  for (int i = 0; i < reduced.num_sets(); ++i) {
    const auto& set = reduced.sets[i];
    for (size_t a = 0; a + 1 < set.size(); ++a) {
      undirected[set[a]].push_back(set[a + 1]);
      undirected[set[a + 1]].push_back(set[a]);
    }
    for (size_t k = 0; k < set.size(); ++k) {
      if (!(reduced.set_wins[i][k] > 0.0)) continue;
      for (int j : set) {
        if (j != set[k]) directed[j].push_back(set[k]);
      }
    }
  }
  ChoiceConnectivity out;
  out.strong = StronglyConnected(directed);
  out.weak = StronglyConnected(undirected);
  return out;
}

ChoiceConnectivity CheckChoiceConnectivity(const ChoiceDataset& dataset) {
  return CheckChoiceConnectivity(Reduce(dataset));
}

EquivalenceCheck CrossCheckEquivalence(const ReducedDataset& reduced) {
  EquivalenceCheck out;
  out.connectivity = CheckChoiceConnectivity(reduced);
  const BalancingProblem problem = ToBalancingProblem(reduced);
  out.applicable = problem.strictly_positive();
  out.verdict = CheckFeasibility(problem);
  out.agree = out.connectivity.strong == (out.verdict.strong_existence &&
                                          out.verdict.uniqueness) &&
              out.connectivity.weak == out.verdict.uniqueness;
  return out;
}

}  // namespace balancekit
