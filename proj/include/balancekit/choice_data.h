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


// Choice observations, rankings and their reduction to unique choice sets.

#ifndef BALANCEKIT_CHOICE_DATA_H_
#define BALANCEKIT_CHOICE_DATA_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "balancekit/core.h"

namespace balancekit {

struct ChoiceObservation {
  std::string chosen;
  std::vector<std::string> choice_set;
};

// Emits (a_k, {a_k, ..., a_l}) for k = 1, ..., l - 1. Throws kDuplicateItem for
// repeated items and kInvalidObservation for fewer than two items.
std::vector<ChoiceObservation> DecomposeRanking(
    const std::vector<std::string>& ranking);

// Observations over a fixed item universe. Items are indexed in canonical id
// order (integer-valued ids numerically, then the rest lexicographically), so
// the indexing does not depend on the order observations arrive in.
class ChoiceDataset {
 public:
  struct Observation {
    int chosen = 0;
    std::vector<int> choice_set;  // sorted item indices
  };

  // Throws kEmptyDataset, kInvalidObservation (chosen not in set, fewer than
  // two items) or kDuplicateItem (an item listed twice in one set).
  static ChoiceDataset FromObservations(
      const std::vector<ChoiceObservation>& observations);

  int num_items() const { return static_cast<int>(items_.size()); }
  int num_observations() const { return static_cast<int>(obs_.size()); }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<Observation>& observations() const { return obs_; }
  // Rankings read alongside the observations, as item-index lists.
  const std::vector<std::vector<int>>& rankings() const { return rankings_; }
  int IndexOf(const std::string& id) const;  // -1 when absent

 private:
  friend ChoiceDataset ParseChoiceJsonl(std::istream& in);
  std::vector<std::string> items_;
  std::vector<Observation> obs_;
  std::vector<std::vector<int>> rankings_;
};

// One JSON object per line: {"chosen": id, "set": [ids]} or
// {"ranking": [ids]}; ids are strings (integers are accepted and converted).
// Blank lines are skipped. Throws kParseError, kInvalidObservation,
// kDuplicateItem, kEmptyDataset.
ChoiceDataset ParseChoiceJsonl(std::istream& in);
ChoiceDataset ReadChoiceJsonlFile(const std::string& path);

// Aggregated form: unique sets with multiplicities R and win counts W. Counts
// are real so that augmented data (fractional pseudo-observations) and
// weighted mixture components share the type.
struct ReducedDataset {
  std::vector<std::string> items;
  std::vector<std::vector<int>> sets;  // sorted item indices, sorted set list
  Vector multiplicity;                 // R_i
  Vector wins;                         // W_j
  // set_wins[i][k]: times sets[i][k] was chosen from set i.
  std::vector<std::vector<double>> set_wins;

  int num_items() const { return static_cast<int>(items.size()); }
  int num_sets() const { return static_cast<int>(sets.size()); }
};

ReducedDataset Reduce(const ChoiceDataset& dataset);

// Reduction with one weight per observation (the mixture M-step).
ReducedDataset ReduceWeighted(const ChoiceDataset& dataset,
                              const Vector& weights);

// Participation matrix A_ij = 1{j in S_i} with p = R and q = W. Zero win
// counts are accepted here; estimation decides what to do with them.
BalancingProblem ToBalancingProblem(const ReducedDataset& reduced);

}  // namespace balancekit

#endif  // BALANCEKIT_CHOICE_DATA_H_
