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


#include "balancekit/choice_data.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <tuple>

#include "balancekit/error.h"
#include "json.hpp"

namespace balancekit {
namespace {

using json = nlohmann::json;

// Integer-valued ids sort numerically ahead of all other ids.
struct CanonicalLess {
  static std::tuple<int, long long, const std::string&> Key(
      const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    const bool integral = !s.empty() && ec == std::errc() &&
                          ptr == s.data() + s.size();
    return {integral ? 0 : 1, integral ? v : 0, s};
  }
  bool operator()(const std::string& a, const std::string& b) const {
    return Key(a) < Key(b);
  }
};

void CheckDistinct(const std::vector<std::string>& ids, const char* what) {
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kDuplicateItem,
                  std::string(what) + " lists item '" + id + "' twice");
    }
  }
}

void CheckObservation(const ChoiceObservation& o) {
  CheckDistinct(o.choice_set, "choice set");
  if (o.choice_set.size() < 2) {
    throw Error(ErrorCode::kInvalidObservation,
                "choice sets need at least two items");
  }
  if (std::find(o.choice_set.begin(), o.choice_set.end(), o.chosen) ==
      o.choice_set.end()) {
    throw Error(ErrorCode::kInvalidObservation,
                "chosen item '" + o.chosen + "' is not in its choice set");
  }
}

std::string IdFromJson(const json& v, int line_no) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::kInvalidObservation,
              "line " + std::to_string(line_no) +
                  ": item ids must be strings or integers");
}

std::vector<std::string> IdListFromJson(const json& v, int line_no) {
  if (!v.is_array()) {
    throw Error(ErrorCode::kInvalidObservation,
                "line " + std::to_string(line_no) + ": expected an id array");
  }
  std::vector<std::string> out;
  for (const json& e : v) out.push_back(IdFromJson(e, line_no));
  return out;
}

ReducedDataset ReduceImpl(const ChoiceDataset& dataset,
                          const Vector* weights) {
  // Keyed by the sorted index tuple, which is also the required set order.
  std::map<std::vector<int>, std::pair<double, std::map<int, double>>> groups;
  ReducedDataset out;
  out.items = dataset.items();
  out.wins = Vector::Zero(dataset.num_items());
  const auto& obs = dataset.observations();
  for (size_t k = 0; k < obs.size(); ++k) {
    const double w = weights ? (*weights)[k] : 1.0;
    if (w <= 0.0) continue;
    auto& g = groups[obs[k].choice_set];
    g.first += w;
    g.second[obs[k].chosen] += w;
    out.wins[obs[k].chosen] += w;
  }
  out.multiplicity.resize(groups.size());
  int i = 0;
  for (auto& [set, g] : groups) {
    out.sets.push_back(set);
    out.multiplicity[i++] = g.first;
    std::vector<double> per_item(set.size(), 0.0);
    for (size_t k = 0; k < set.size(); ++k) {
      auto it = g.second.find(set[k]);
      if (it != g.second.end()) per_item[k] = it->second;
    }
    out.set_wins.push_back(std::move(per_item));
  }
  return out;
}

}  // namespace

std::vector<ChoiceObservation> DecomposeRanking(
    const std::vector<std::string>& ranking) {
  CheckDistinct(ranking, "ranking");
  if (ranking.size() < 2) {
    throw Error(ErrorCode::kInvalidObservation,
                "a ranking needs at least two items");
  }
  std::vector<ChoiceObservation> out;
  for (size_t k = 0; k + 1 < ranking.size(); ++k) {
    out.push_back({ranking[k], {ranking.begin() + k, ranking.end()}});
  }
  return out;
}

ChoiceDataset ChoiceDataset::FromObservations(
    const std::vector<ChoiceObservation>& observations) {
  if (observations.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no observations");
  }
  std::set<std::string, CanonicalLess> ids;
  for (const ChoiceObservation& o : observations) {
    CheckObservation(o);
    ids.insert(o.choice_set.begin(), o.choice_set.end());
  }
  ChoiceDataset d;
  d.items_.assign(ids.begin(), ids.end());
  d.obs_.reserve(observations.size());
  for (const ChoiceObservation& o : observations) {
    Observation x;
    x.chosen = d.IndexOf(o.chosen);
    for (const std::string& id : o.choice_set) {
      x.choice_set.push_back(d.IndexOf(id));
    }
    std::sort(x.choice_set.begin(), x.choice_set.end());
    d.obs_.push_back(std::move(x));
  }
  return d;
}

int ChoiceDataset::IndexOf(const std::string& id) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), id, CanonicalLess());
  if (it == items_.end() || *it != id) return -1;
  return static_cast<int>(it - items_.begin());
}

ChoiceDataset ParseChoiceJsonl(std::istream& in) {
  std::vector<ChoiceObservation> observations;
  std::vector<std::vector<std::string>> rankings;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected an object");
    }
    if (obj.contains("ranking")) {
      auto ranking = IdListFromJson(obj["ranking"], line_no);
      for (auto& o : DecomposeRanking(ranking)) observations.push_back(o);
      rankings.push_back(std::move(ranking));
    } else if (obj.contains("chosen") && obj.contains("set")) {
      ChoiceObservation o{IdFromJson(obj["chosen"], line_no),
                          IdListFromJson(obj["set"], line_no)};
      observations.push_back(std::move(o));
    } else {
      throw Error(ErrorCode::kInvalidObservation,
                  "line " + std::to_string(line_no) +
                      ": need 'ranking' or both 'chosen' and 'set'");
    }
  }
  ChoiceDataset d = ChoiceDataset::FromObservations(observations);
  for (const auto& r : rankings) {
    std::vector<int> idx;
    for (const auto& id : r) idx.push_back(d.IndexOf(id));
    d.rankings_.push_back(std::move(idx));
  }
  return d;
}

ChoiceDataset ReadChoiceJsonlFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ParseChoiceJsonl(in);
}

ReducedDataset Reduce(const ChoiceDataset& dataset) {
  return ReduceImpl(dataset, nullptr);
}

ReducedDataset ReduceWeighted(const ChoiceDataset& dataset,
                              const Vector& weights) {
  if (weights.size() != dataset.num_observations()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "one weight per observation is required");
  }
  return ReduceImpl(dataset, &weights);
}

BalancingProblem ToBalancingProblem(const ReducedDataset& reduced) {
  std::vector<MatrixEntry> entries;
  for (int i = 0; i < reduced.num_sets(); ++i) {
    for (int j : reduced.sets[i]) entries.push_back({i, j, 1.0});
  }
  NonnegMatrix a = NonnegMatrix::FromEntries(
      reduced.num_sets(), reduced.num_items(), entries);
  return BuildProblem(std::move(a), reduced.multiplicity, reduced.wins,
                      MarginalPolicy::kAllowZero);
}

}  // namespace balancekit
