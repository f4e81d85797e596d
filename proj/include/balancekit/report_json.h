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


// JSON views of the library's reports, as emitted by the command-line tool.

#ifndef BALANCEKIT_REPORT_JSON_H_
#define BALANCEKIT_REPORT_JSON_H_

#include "balancekit/balancing.h"
#include "balancekit/bench.h"
#include "balancekit/choice.h"
#include "balancekit/feasibility.h"
#include "balancekit/mixture.h"
#include "balancekit/spectral.h"
#include "json.hpp"

namespace balancekit {

nlohmann::json ToJson(const Vector& v);
nlohmann::json ToJson(const RunReport& report, bool with_history);
nlohmann::json ToJson(const FeasibilityVerdict& verdict);
nlohmann::json ToJson(const ChoiceConnectivity& connectivity);
nlohmann::json ToJson(const LuceEstimate& estimate);
nlohmann::json ToJson(const RateReport& report);
nlohmann::json ToJson(const MixtureModel& model,
                      const std::vector<std::string>& items);
nlohmann::json ToJson(const EmTrace& trace);
nlohmann::json ToJson(const BenchReport& report);

}  // namespace balancekit

#endif  // BALANCEKIT_REPORT_JSON_H_
