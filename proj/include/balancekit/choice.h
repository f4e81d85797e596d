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


// Luce choice model estimation through matrix balancing, and the classical
// iterations that coincide with one Sinkhorn step: Hunter's MM update for
// rankings, the Zermelo/Ford update for pairwise comparisons and ChoiceRank
// on transition graphs.

#ifndef BALANCEKIT_CHOICE_H_
#define BALANCEKIT_CHOICE_H_

#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Core"
#include "balancekit/balancing.h"
#include "balancekit/choice_data.h"

namespace balancekit {

enum class ScoreNormalization { kSimplex, kSumM };
std::string_view NormalizationName(ScoreNormalization n);

struct EstimateConfig {
  ScoreNormalization normalization = ScoreNormalization::kSimplex;
  Variant variant = Variant::kPlain;  // plain or normalized
  int max_iterations = 100000;
  // Sinkhorn stops once the l1 marginal error drops below tol * sum(R).
  double tol = 1e-11;
  double foc_tol = 1e-8;
};

struct LuceEstimate {
  std::vector<std::string> items;
  Vector scores;
  ScoreNormalization normalization = ScoreNormalization::kSimplex;
  double log_likelihood = 0.0;
  double foc_residual = 0.0;
  int iterations = 0;
  Termination termination = Termination::kMaxIter;
  bool converged = false;
  bool regularized = false;
  double raw_sum = 0.0;  // sum of the scalings before normalization
};

// sum_j W_j log s_j - sum_i R_i log sum_{k in S_i} s_k.
double LogLikelihood(const ReducedDataset& reduced, const Vector& s);

// max_j |W_j - sum_{i : j in S_i} R_i s_j / sum_{k in S_i} s_k|, evaluated on
// s rescaled to the simplex.
double FocResidual(const ReducedDataset& reduced, const Vector& s);

// max_j |W_j + alpha - 1 - (sum_{i : j in S_i} R_i s_j / sum_{k in S_i} s_k
//                           + beta s_j)| on the unnormalized scores.
double RegularizedFocResidual(const ReducedDataset& reduced, const Vector& s,
                              double alpha, double beta);

Vector NormalizeScores(const Vector& s, ScoreNormalization normalization);

// Maximum likelihood scores. Throws kInfeasibleDataset when some item never
// wins or the comparison graph is not strongly connected (the likelihood then
// has no interior maximizer), and kNotConverged when Sinkhorn stops early.
LuceEstimate EstimateMle(const ReducedDataset& reduced,
                         const EstimateConfig& config = {});

// MAP scores under independent Gamma(alpha, beta) priors. The scale of the
// raw scalings is pinned by beta; scores are still returned normalized.
LuceEstimate EstimateRegularized(const ReducedDataset& reduced, double alpha,
                                 double beta,
                                 const EstimateConfig& config = {});

// Adds eps to every win count through a pseudo-observation block on the full
// item set (multiplicity m * eps). Throws kInvalidArgument for eps <= 0.
ReducedDataset AugmentData(const ReducedDataset& reduced, double eps);

LuceEstimate EstimateAugmented(const ReducedDataset& reduced, double eps,
                               const EstimateConfig& config = {});

// s'_j = W_j / sum_{i : j in S_i} R_i / sum_{k in S_i} s_k.
Vector ScalingIterationUpdate(const ReducedDataset& reduced, const Vector& s);

// Hunter's MM update for Plackett-Luce rankings (item-index lists):
//   s'_k = w_k / sum_i sum_{j < l_i} [k in {a_ij, ..., a_il_i}]
//                                    / sum_{j' >= j} s_{a_ij'}
// with w_k the number of rankings in which k appears but is not last.
Vector MmUpdate(const std::vector<std::vector<int>>& rankings, int num_items,
                const Vector& s);

// Zermelo/Ford iteration in Dykstra's form; wins(j, k) counts j beating k.
//   s'_j = W_j / sum_{k != j} (wins(j, k) + wins(k, j)) / (s_j + s_k).
Vector PairwiseUpdate(const Eigen::MatrixXd& wins, const Vector& s);

// Pairwise comparison counts as a choice dataset over items "0", "1", ...
ReducedDataset PairwiseDataset(const Eigen::MatrixXd& wins);

// Directed graph with transition counts; an edge may carry zero transitions.
struct TransitionGraph {
  struct Edge {
    int from = 0;
    int to = 0;
    double count = 0.0;
  };
  int num_nodes = 0;
  std::vector<Edge> edges;

  Vector InCounts() const;
  Vector OutCounts() const;
};

// One ChoiceRank iteration without prior:
//   gamma_j = c_out_j / sum_{k in N_out(j)} s_k,
//   s'_k = c_in_k / sum_{j : k in N_out(j)} gamma_j.
// Throws kIsolatedNode when a node has no incoming edge.
Vector ChoiceRankUpdate(const TransitionGraph& graph, const Vector& s);

// Choice sets are out-neighbourhoods, each transition is one observation of
// its target being chosen from the source's neighbourhood.
ReducedDataset ChoiceRankDataset(const TransitionGraph& graph);

}  // namespace balancekit

#endif  // BALANCEKIT_CHOICE_H_
