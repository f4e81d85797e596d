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


// Text formats for matrices and vectors. Matrix input is Matrix Market
// coordinate format (real or integer, general); vectors are single-column CSV
// files whose header line is `value`. NaN and Inf are rejected everywhere.

#ifndef BALANCEKIT_IO_H_
#define BALANCEKIT_IO_H_

#include <iosfwd>
#include <string>

#include "balancekit/core.h"

namespace balancekit {

NonnegMatrix ReadMatrixMarket(std::istream& in);
NonnegMatrix ReadMatrixMarketFile(const std::string& path);
void WriteMatrixMarket(std::ostream& out, const NonnegMatrix& a);

Vector ReadVectorCsv(std::istream& in);
Vector ReadVectorCsvFile(const std::string& path);
void WriteVectorCsv(std::ostream& out, const Vector& v);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double x);

}  // namespace balancekit

#endif  // BALANCEKIT_IO_H_
