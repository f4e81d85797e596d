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


// EM for finite mixtures of Luce models. Each M-step solves one weighted
// balancing problem per component.

#ifndef BALANCEKIT_MIXTURE_H_
#define BALANCEKIT_MIXTURE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "Eigen/Core"
#include "balancekit/choice.h"
#include "balancekit/choice_data.h"

namespace balancekit {

struct MixtureModel {
  std::vector<Vector> components;  // simplex-normalized scores
  Vector weights;                  // mixture probabilities

  int num_components() const { return static_cast<int>(components.size()); }
};

// Throws kInvalidArgument unless weights are a positive probability vector
// and every component is a positive vector of the given length.
void ValidateModel(const MixtureModel& model, int num_items);

// Components drawn from a symmetric Dirichlet(1), uniform weights.
MixtureModel RandomMixture(int num_items, int num_components, uint64_t seed);

// n_obs x r posterior membership probabilities, computed in log space.
using Responsibilities = Eigen::MatrixXd;

Responsibilities EStep(const ChoiceDataset& dataset, const MixtureModel& model);

double ObservedLogLikelihood(const ChoiceDataset& dataset,
                             const MixtureModel& model);

// Regularization used for a component whose weighted data has an item with
// zero wins or a comparison graph that is not strongly connected.
inline constexpr double kFallbackAlpha = 1.0 + 1e-3;
inline constexpr double kFallbackBetaPerItem = 1e-3;

struct MStepResult {
  MixtureModel model;
  std::vector<char> regularized;  // per component
  // Warm-started plain runs that hit the iteration limit; their last iterate
  // is kept as a generalized M-step.
  std::vector<char> partial;
};

// Weights are the column means of the responsibilities. Component l solves
// the balancing problem with p_i = total responsibility of set i and
// q_j = total responsibility of the observations choosing j. warm_start, when
// given, seeds each component's Sinkhorn run. Throws kNotConverged when a run
// without a warm start or with the prior does not converge.
MStepResult MStep(const ChoiceDataset& dataset, const Responsibilities& w,
                  const MixtureModel* warm_start = nullptr,
                  const EstimateConfig& config = {});

struct EmConfig {
  int num_components = 2;
  uint64_t seed = 0;
  int max_rounds = 500;
  double tol = 1e-9;  // stop once a round improves the likelihood by less
  std::optional<MixtureModel> init;
  EstimateConfig inner{.max_iterations = 10000};
};

struct EmTrace {
  std::vector<double> log_likelihood;  // entry 0 is the initial model
  std::vector<int> regularized_components;  // per round
  std::vector<int> partial_components;      // per round
  int rounds = 0;
  bool converged = false;
};

struct EmResult {
  MixtureModel model;
  EmTrace trace;
};

EmResult RunEm(const ChoiceDataset& dataset, const EmConfig& config);

}  // namespace balancekit

#endif  // BALANCEKIT_MIXTURE_H_
