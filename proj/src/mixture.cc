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


#include "balancekit/mixture.h"

#include <cmath>
#include <random>
#include <string>

#include "balancekit/balancing.h"
#include "balancekit/error.h"
#include "balancekit/feasibility.h"

namespace balancekit {
namespace {

// log p_l + log s^l_chosen - log sum_{k in S} s^l_k for every observation.
Eigen::MatrixXd LogJoint(const ChoiceDataset& dataset,
                         const MixtureModel& model) {
  const int r = model.num_components();
  const auto& obs = dataset.observations();
  Eigen::MatrixXd out(obs.size(), r);
  for (int l = 0; l < r; ++l) {
    const Vector& s = model.components[l];
    const double log_weight = std::log(model.weights[l]);
    for (size_t i = 0; i < obs.size(); ++i) {
      double mass = 0.0;
      for (int k : obs[i].choice_set) mass += s[k];
      out(i, l) = log_weight + std::log(s[obs[i].chosen]) - std::log(mass);
    }
  }
  return out;
}

Vector RowLogSumExp(const Eigen::MatrixXd& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double top = x.row(i).maxCoeff();
    out[i] = top + std::log((x.row(i).array() - top).exp().sum());
  }
  return out;
}

}  // namespace

void ValidateModel(const MixtureModel& model, int num_items) {
  const int r = model.num_components();
  if (r < 1 || model.weights.size() != r) {
    throw Error(ErrorCode::kInvalidArgument,
                "mixture needs one weight per component");
  }
  if (!(model.weights.array() > 0.0).all() ||
      std::abs(model.weights.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "mixture weights must be a positive probability vector");
  }
  for (const Vector& s : model.components) {
    if (s.size() != num_items || !(s.array() > 0.0).all() ||
        !s.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "component scores must be positive, one per item");
    }
  }
}

MixtureModel RandomMixture(int num_items, int num_components, uint64_t seed) {
  if (num_items < 1 || num_components < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need items and components");
  }
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gamma1(1.0);  // Gamma(1, 1)
  MixtureModel model;
  for (int l = 0; l < num_components; ++l) {
    Vector s(num_items);
    for (int j = 0; j < num_items; ++j) s[j] = gamma1(rng);
    model.components.push_back(s / s.sum());
  }
  model.weights = Vector::Constant(num_components, 1.0 / num_components);
  return model;
}

Responsibilities EStep(const ChoiceDataset& dataset,
                       const MixtureModel& model) {
  ValidateModel(model, dataset.num_items());
  const Eigen::MatrixXd joint = LogJoint(dataset, model);
  const Vector norm = RowLogSumExp(joint);
  Responsibilities w = (joint.colwise() - norm).array().exp();
  // Renormalize so each row sums to one to the last bit we can manage.
  w = w.array().colwise() / w.rowwise().sum().array();
  return w;
}

double ObservedLogLikelihood(const ChoiceDataset& dataset,
                             const MixtureModel& model) {
  ValidateModel(model, dataset.num_items());
  return RowLogSumExp(LogJoint(dataset, model)).sum();
}

MStepResult MStep(const ChoiceDataset& dataset, const Responsibilities& w,
                  const MixtureModel* warm_start,
                  const EstimateConfig& config) {
  const int r = static_cast<int>(w.cols());
  const int m = dataset.num_items();
  if (w.rows() != dataset.num_observations() || r < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "responsibilities do not match the dataset");
  }
  MStepResult out;
  out.model.weights = w.colwise().mean().transpose();
  out.regularized.assign(r, 0);
  out.partial.assign(r, 0);
  for (int l = 0; l < r; ++l) {
    const ReducedDataset reduced = ReduceWeighted(dataset, w.col(l));
    const BalancingProblem problem = ToBalancingProblem(reduced);
    SinkhornConfig sc;
    sc.max_iterations = config.max_iterations;
    sc.tol = config.tol * problem.total_mass();
    if (warm_start) {
      ScalingState init = ScalingState::Ones(problem);
      init.d0 = warm_start->components[l];
      sc.initial = init;
    }
    const bool needs_prior = !(reduced.wins.array() > 0.0).all() ||
                             !CheckChoiceConnectivity(reduced).strong;
    if (needs_prior) {
      sc.variant = Variant::kRegularized;
      sc.alpha = kFallbackAlpha;
      sc.beta = kFallbackBetaPerItem * m;
      out.regularized[l] = 1;
    } else {
      sc.variant = config.variant;
    }
    const RunResult run = Run(problem, sc);
    if (run.report.termination != Termination::kConverged) {
      // Every Sinkhorn iterate started from the previous scores increases the
      // weighted likelihood, so an unfinished plain run still yields an
      // ascent step. Regularized runs and cold starts have no such guarantee.
      if (needs_prior || !warm_start) {
        throw Error(ErrorCode::kNotConverged,
                    "component " + std::to_string(l) + " stopped with " +
                        std::string(TerminationName(run.report.termination)));
      }
      out.partial[l] = 1;
    }
    out.model.components.push_back(run.state.d0 / run.state.d0.sum());
  }
  return out;
}

EmResult RunEm(const ChoiceDataset& dataset, const EmConfig& config) {
  if (config.num_components < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one component");
  }
  EmResult result;
  result.model = config.init ? *config.init
                             : RandomMixture(dataset.num_items(),
                                             config.num_components,
                                             config.seed);
  ValidateModel(result.model, dataset.num_items());
  EmTrace& trace = result.trace;
  double ll = ObservedLogLikelihood(dataset, result.model);
  trace.log_likelihood.push_back(ll);
  for (int round = 0; round < config.max_rounds; ++round) {
    const Responsibilities w = EStep(dataset, result.model);
    MStepResult step = MStep(dataset, w, &result.model, config.inner);
    int flagged = 0, partial = 0;
    for (char c : step.regularized) flagged += c;
    for (char c : step.partial) partial += c;
    result.model = std::move(step.model);
    const double next = ObservedLogLikelihood(dataset, result.model);
    trace.log_likelihood.push_back(next);
    trace.regularized_components.push_back(flagged);
    trace.partial_components.push_back(partial);
    trace.rounds = round + 1;
    const double gain = next - ll;
    ll = next;
    if (gain < config.tol) {
      trace.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace balancekit
