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


// Existence and uniqueness of matrix scalings, and the matching connectivity
// conditions on choice data.
//
// Existence is decided with one maximum flow on the network
//   source -> row i (capacity p_i) -> column j (A_ij > 0, unbounded)
//          -> sink (capacity q_j).
// A nonnegative matrix with the zero pattern of A (or a sub-pattern) and the
// target marginals exists iff the flow saturates every source edge. It can be
// chosen with the exact pattern of A iff in addition every middle edge either
// carries flow or lies on a cycle of the residual graph.

#ifndef BALANCEKIT_FEASIBILITY_H_
#define BALANCEKIT_FEASIBILITY_H_

#include <optional>
#include <string_view>
#include <vector>

#include "balancekit/choice_data.h"
#include "balancekit/core.h"

namespace balancekit {

enum class Regime { kDirectScaling, kLimitScaling, kInfeasible, kNonUnique };
std::string_view RegimeName(Regime r);

// A pair (N, M) of row and column index sets. For a weak-existence failure
//   sum_{i in N} p_i < sum_{j in M} q_j
// while no row outside N touches a column in M. For a strong-existence failure
// the two sums are equal and forced_edge = (i, j) is a positive entry with
// i in N and j outside M, which every balanced matrix must set to zero.
struct Witness {
  std::vector<int> rows;
  std::vector<int> cols;
  double row_mass = 0.0;
  double col_mass = 0.0;
  std::optional<std::pair<int, int>> forced_edge;
};

struct ExistenceResult {
  bool weak = false;
  bool strong = false;
  bool exact_arithmetic = false;  // integral marginals, integer flow
  std::optional<Witness> witness;
};

struct FeasibilityVerdict {
  bool uniqueness = false;
  bool weak_existence = false;
  bool strong_existence = false;
  std::optional<Witness> witness;
  Regime regime = Regime::kInfeasible;
};

// Connectivity of the bipartite graph of A.
bool CheckUniqueness(const NonnegMatrix& a);

ExistenceResult CheckExistence(const BalancingProblem& problem);

FeasibilityVerdict CheckFeasibility(const BalancingProblem& problem);

// True iff the witness satisfies its defining (in)equality when re-evaluated
// from (A, p, q).
bool WitnessHolds(const BalancingProblem& problem, const Witness& witness,
                  bool strong_failure);

struct ChoiceConnectivity {
  bool strong = false;  // comparison digraph strongly connected
  bool weak = false;    // co-occurrence graph connected
};

// Directed edge j -> k whenever k was chosen from a set containing j. Throws
// kEmptyDataset.
ChoiceConnectivity CheckChoiceConnectivity(const ReducedDataset& reduced);
ChoiceConnectivity CheckChoiceConnectivity(const ChoiceDataset& dataset);

struct EquivalenceCheck {
  bool agree = false;
  ChoiceConnectivity connectivity;
  FeasibilityVerdict verdict;
  bool applicable = true;  // false when some win count is zero
};

// Compares strong connectivity with (strong existence and uniqueness), and
// weak connectivity with uniqueness, on the reduced problem. When some item
// never wins the matrix problem has a zero target; the comparison then uses
// the same flow test with zero-capacity sink edges and applicable is false.
EquivalenceCheck CrossCheckEquivalence(const ReducedDataset& reduced);

}  // namespace balancekit

#endif  // BALANCEKIT_FEASIBILITY_H_
