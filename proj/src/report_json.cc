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


#include "balancekit/report_json.h"

#include <string>

namespace balancekit {

using nlohmann::json;

json ToJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json ToJson(const RunReport& report, bool with_history) {
  json out = {
      {"variant", VariantName(report.variant)},
      {"iterations", report.iterations},
      {"termination", TerminationName(report.termination)},
      {"final_l1_row_err", report.final_l1_row_err},
      {"final_l1_col_err", report.final_l1_col_err},
  };
  if (with_history) {
    json history = json::array();
    for (const IterationRecord& r : report.history) {
      history.push_back({{"t", r.t},
                         {"g", r.g},
                         {"l1_row_err", r.l1_row_err},
                         {"kl_row", r.kl_row},
                         {"kl_col", r.kl_col}});
    }
    out["history"] = std::move(history);
  }
  return out;
}

json ToJson(const FeasibilityVerdict& verdict) {
  json out = {
      {"uniqueness", verdict.uniqueness},
      {"weak_existence", verdict.weak_existence},
      {"strong_existence", verdict.strong_existence},
      {"regime", RegimeName(verdict.regime)},
      {"witness", nullptr},
  };
  if (verdict.witness) {
    const Witness& w = *verdict.witness;
    json wj = {{"rows", w.rows},
               {"cols", w.cols},
               {"row_mass", w.row_mass},
               {"col_mass", w.col_mass}};
    if (w.forced_edge) {
      wj["forced_edge"] = {w.forced_edge->first, w.forced_edge->second};
    }
    out["witness"] = std::move(wj);
  }
  return out;
}

json ToJson(const ChoiceConnectivity& connectivity) {
  return {{"strong", connectivity.strong}, {"weak", connectivity.weak}};
}

json ToJson(const LuceEstimate& estimate) {
  json scores = json::object();
  for (size_t j = 0; j < estimate.items.size(); ++j) {
    scores[estimate.items[j]] = estimate.scores[static_cast<Eigen::Index>(j)];
  }
  return {
      {"scores", std::move(scores)},
      {"normalization", NormalizationName(estimate.normalization)},
      {"log_likelihood", estimate.log_likelihood},
      {"foc_residual", estimate.foc_residual},
      {"iterations", estimate.iterations},
      {"termination", TerminationName(estimate.termination)},
      {"converged", estimate.converged},
      {"regularized", estimate.regularized},
  };
}

json ToJson(const RateReport& report) {
  json out = {
      {"fiedler", report.global.fiedler},
      {"l0", report.global.l0},
      {"l1", report.global.l1},
      {"b_empirical", report.global.b_empirical},
      {"global_rate_bound", report.global.global_rate_bound},
      {"asymptotic_rate", nullptr},
      {"c_constant", nullptr},
      {"xi_constant", nullptr},
  };
  if (report.asymptotic) {
    out["asymptotic_rate"] = report.asymptotic->rate;
    out["top_eigenvalue"] = report.asymptotic->top_eigenvalue;
  }
  if (report.complexity) {
    out["c_constant"] = report.complexity->c_constant;
    out["xi_constant"] = report.complexity->xi_constant;
  }
  return out;
}

json ToJson(const MixtureModel& model, const std::vector<std::string>& items) {
  json components = json::array();
  for (const Vector& s : model.components) {
    json c = json::object();
    for (size_t j = 0; j < items.size(); ++j) {
      c[items[j]] = s[static_cast<Eigen::Index>(j)];
    }
    components.push_back(std::move(c));
  }
  return {{"weights", ToJson(model.weights)},
          {"components", std::move(components)}};
}

json ToJson(const EmTrace& trace) {
  return {{"log_likelihood", trace.log_likelihood},
          {"regularized_components", trace.regularized_components},
          {"partial_components", trace.partial_components},
          {"rounds", trace.rounds},
          {"converged", trace.converged}};
}

json ToJson(const BenchReport& report) {
  json cells = json::array();
  for (const BenchCell& c : report.cells) {
    cells.push_back({{"distribution", DistributionName(c.distribution)},
                     {"n", c.n},
                     {"samples", c.samples},
                     {"discarded", c.discarded},
                     {"median_xi", c.median_xi},
                     {"median_c", c.median_c},
                     {"median_fiedler", c.median_fiedler}});
  }
  json slopes = json::object();
  for (const BenchSlope& s : report.slopes) {
    slopes[std::string(DistributionName(s.distribution))] = s.slope;
  }
  return {{"cells", std::move(cells)}, {"slopes", std::move(slopes)}};
}

}  // namespace balancekit
