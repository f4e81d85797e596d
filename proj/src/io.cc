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


#include "balancekit/io.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "balancekit/error.h"

namespace balancekit {
namespace {

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(c));
  return s;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double ParseFinite(const std::string& token, int line_no) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                            ": cannot parse '" + token + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidValue, "line " + std::to_string(line_no) +
                                              ": non-finite value");
  }
  return v;
}

template <typename Fn>
auto WithFile(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return fn(in);
}

}  // namespace

NonnegMatrix ReadMatrixMarket(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParseError, "empty Matrix Market stream");
  }
  ++line_no;
  std::istringstream banner(Lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" ||
      format != "coordinate") {
    throw Error(ErrorCode::kParseError,
                "expected a '%%MatrixMarket matrix coordinate' banner");
  }
  if ((field != "real" && field != "integer") || symmetry != "general") {
    throw Error(ErrorCode::kParseError,
                "only real/integer general matrices are supported");
  }
  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream size_line(t);
    if (!(size_line >> rows >> cols >> nnz) || rows < 1 || cols < 1 ||
        nnz < 0) {
      throw Error(ErrorCode::kParseError, "bad size line");
    }
    break;
  }
  if (rows < 0) throw Error(ErrorCode::kParseError, "missing size line");
  std::vector<MatrixEntry> entries;
  entries.reserve(nnz);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::istringstream entry(t);
    long i = 0, j = 0;
    std::string value;
    if (!(entry >> i >> j >> value)) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": bad entry");
    }
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1),
                       ParseFinite(value, line_no)});
  }
  if (static_cast<long>(entries.size()) != nnz) {
    throw Error(ErrorCode::kParseError,
                "expected " + std::to_string(nnz) + " entries, found " +
                    std::to_string(entries.size()));
  }
  return NonnegMatrix::FromEntries(static_cast<int>(rows),
                                   static_cast<int>(cols), entries);
}

NonnegMatrix ReadMatrixMarketFile(const std::string& path) {
  return WithFile(path, [](std::istream& in) { return ReadMatrixMarket(in); });
}

void WriteMatrixMarket(std::ostream& out, const NonnegMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonzeros() << '\n';
  a.ForEachNonzero([&](int i, int j, double v) {
    out << i + 1 << ' ' << j + 1 << ' ' << FormatDouble(v) << '\n';
  });
}

Vector ReadVectorCsv(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      if (Lower(t) != "value") {
        throw Error(ErrorCode::kParseError,
                    "vector CSV must start with a 'value' header");
      }
      have_header = true;
      continue;
    }
    if (t.find(',') != std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected one column");
    }
    values.push_back(ParseFinite(t, line_no));
  }
  if (!have_header) throw Error(ErrorCode::kParseError, "missing header");
  if (values.empty()) throw Error(ErrorCode::kParseError, "empty vector");
  return Eigen::Map<Vector>(values.data(), values.size());
}

Vector ReadVectorCsvFile(const std::string& path) {
  return WithFile(path, [](std::istream& in) { return ReadVectorCsv(in); });
}

void WriteVectorCsv(std::ostream& out, const Vector& v) {
  out << "value\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << FormatDouble(v[i]) << '\n';
}

std::string FormatDouble(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace balancekit
