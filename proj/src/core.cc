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


#include "balancekit/core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "balancekit/error.h"

namespace balancekit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonpositiveMarginal: return "NonpositiveMarginal";
    case ErrorCode::kMarginalSumMismatch: return "MarginalSumMismatch";
    case ErrorCode::kZeroRowOrColumn: return "ZeroRowOrColumn";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNumericOverflow: return "NumericOverflow";
    case ErrorCode::kInsufficientHistory: return "InsufficientHistory";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kEigensolverNoConvergence:
      return "EigensolverNoConvergence";
    case ErrorCode::kInvalidObservation: return "InvalidObservation";
    case ErrorCode::kDuplicateItem: return "DuplicateItem";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInfeasibleDataset: return "InfeasibleDataset";
    case ErrorCode::kIsolatedNode: return "IsolatedNode";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

void CheckPattern(const NonnegMatrix::Storage& s) {
  if (s.rows() < 1 || s.cols() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix must be at least 1x1");
  }
  std::vector<char> row_hit(s.rows(), 0), col_hit(s.cols(), 0);
  for (int i = 0; i < s.outerSize(); ++i) {
    for (NonnegMatrix::Storage::InnerIterator it(s, i); it; ++it) {
      const double v = it.value();
      if (!std::isfinite(v) || v <= 0.0) {
        throw Error(ErrorCode::kInvalidValue,
                    "entry (" + std::to_string(i) + ", " +
                        std::to_string(it.col()) +
                        ") is not a positive finite number");
      }
      row_hit[i] = 1;
      col_hit[it.col()] = 1;
    }
  }
  for (int i = 0; i < s.rows(); ++i) {
    if (!row_hit[i]) {
      throw Error(ErrorCode::kZeroRowOrColumn,
                  "row " + std::to_string(i) + " is all zero");
    }
  }
  for (int j = 0; j < s.cols(); ++j) {
    if (!col_hit[j]) {
      throw Error(ErrorCode::kZeroRowOrColumn,
                  "column " + std::to_string(j) + " is all zero");
    }
  }
}

void CheckFiniteVector(const Vector& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::kInvalidValue,
                  std::string(name) + " has a non-finite entry");
    }
  }
}

}  // namespace

NonnegMatrix NonnegMatrix::FromEntries(int n_rows, int n_cols,
                                       std::span<const MatrixEntry> entries) {
  if (n_rows < 1 || n_cols < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix must be at least 1x1");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const MatrixEntry& e : entries) {
    if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "entry index (" + std::to_string(e.row) + ", " +
                      std::to_string(e.col) + ") out of range");
    }
    if (!std::isfinite(e.value) || e.value < 0.0) {
      throw Error(ErrorCode::kInvalidValue,
                  "matrix entries must be finite and nonnegative");
    }
    if (e.value > 0.0) triplets.emplace_back(e.row, e.col, e.value);
  }
  Storage s(n_rows, n_cols);
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  CheckPattern(s);
  return NonnegMatrix(std::move(s));
}

NonnegMatrix NonnegMatrix::FromDense(const Eigen::MatrixXd& dense) {
  std::vector<MatrixEntry> entries;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      if (v != 0.0 || std::isnan(v)) {
        entries.push_back({static_cast<int>(i), static_cast<int>(j), v});
      }
    }
  }
  return FromEntries(static_cast<int>(dense.rows()),
                     static_cast<int>(dense.cols()), entries);
}

NonnegMatrix NonnegMatrix::FromStorage(Storage storage) {
  storage.makeCompressed();
  CheckPattern(storage);
  return NonnegMatrix(std::move(storage));
}

Vector NonnegMatrix::Multiply(const Vector& x) const { return storage_ * x; }

Vector NonnegMatrix::MultiplyTransposed(const Vector& y) const {
  return storage_.transpose() * y;
}

Vector NonnegMatrix::RowSums() const {
  return Multiply(Vector::Ones(cols()));
}

Vector NonnegMatrix::ColSums() const {
  return MultiplyTransposed(Vector::Ones(rows()));
}

double NonnegMatrix::MaxEntry() const {
  double m = 0.0;
  ForEachNonzero([&](int, int, double v) { m = std::max(m, v); });
  return m;
}

double NonnegMatrix::Sum() const { return storage_.sum(); }

Eigen::MatrixXd NonnegMatrix::ToDense() const {
  return Eigen::MatrixXd(storage_);
}

std::vector<MatrixEntry> NonnegMatrix::Entries() const {
  std::vector<MatrixEntry> out;
  out.reserve(nonzeros());
  ForEachNonzero([&](int i, int j, double v) { out.push_back({i, j, v}); });
  return out;
}

BalancingProblem BalancingProblem::WithReferencePotential(double g_star) const {
  BalancingProblem copy = *this;
  copy.g_star_ = g_star;
  return copy;
}

BalancingProblem BuildProblem(NonnegMatrix a, Vector p, Vector q,
                              MarginalPolicy policy) {
  if (p.size() != a.rows() || q.size() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "marginals do not match a " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " matrix");
  }
  CheckFiniteVector(p, "p");
  CheckFiniteVector(q, "q");
  const bool allow_zero = policy == MarginalPolicy::kAllowZero;
  bool strictly_positive = true;
  for (const Vector* v : {&p, &q}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      const double x = (*v)[i];
      if (x < 0.0 || (x == 0.0 && !allow_zero)) {
        throw Error(ErrorCode::kNonpositiveMarginal,
                    std::string(v == &p ? "p" : "q") + "[" +
                        std::to_string(i) + "] = " + std::to_string(x));
      }
      if (x == 0.0) strictly_positive = false;
    }
  }
  const double sp = p.sum();
  const double sq = q.sum();
  if (sp <= 0.0 || sq <= 0.0) {
    throw Error(ErrorCode::kNonpositiveMarginal, "marginals sum to zero");
  }
  double factor = 1.0;
  if (sp != sq) {
    if (std::abs(sp - sq) > kMarginalSumRelTol * std::max(sp, sq)) {
      throw Error(ErrorCode::kMarginalSumMismatch,
                  "sum(p) = " + std::to_string(sp) +
                      " differs from sum(q) = " + std::to_string(sq));
    }
    factor = sp / sq;
    q *= factor;
  }
  BalancingProblem prob(std::move(a), std::move(p), std::move(q));
  prob.q_rescale_ = factor;
  prob.strictly_positive_ = strictly_positive;
  return prob;
}

ScalingState ScalingState::Ones(const BalancingProblem& problem) {
  ScalingState s;
  s.d0 = Vector::Ones(problem.cols());
  s.d1 = Vector::Ones(problem.rows());
  return s;
}

void ValidateState(const BalancingProblem& problem, const ScalingState& state) {
  if (state.d0.size() != problem.cols() || state.d1.size() != problem.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "scaling vectors do not match the problem shape");
  }
  for (const Vector* v : {&state.d0, &state.d1}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      if (!std::isfinite((*v)[i]) || (*v)[i] <= 0.0) {
        throw Error(ErrorCode::kInvalidValue,
                    "scaling entries must be positive and finite");
      }
    }
  }
}

NonnegMatrix ScaledMatrix(const BalancingProblem& problem,
                          const ScalingState& state) {
  ValidateState(problem, state);
  NonnegMatrix::Storage s = problem.a().storage();
  for (int i = 0; i < s.outerSize(); ++i) {
    for (NonnegMatrix::Storage::InnerIterator it(s, i); it; ++it) {
      const double v = state.d1[i] * it.value() * state.d0[it.col()];
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kNumericOverflow,
                    "scaled entry left the representable range");
      }
      it.valueRef() = v;
    }
  }
  return NonnegMatrix::FromStorage(std::move(s));
}

MarginalSnapshot Marginals(const BalancingProblem& problem,
                           const ScalingState& state) {
  ValidateState(problem, state);
  const NonnegMatrix& a = problem.a();
  MarginalSnapshot snap;
  snap.r = state.d1.cwiseProduct(a.Multiply(state.d0));
  snap.c = state.d0.cwiseProduct(a.MultiplyTransposed(state.d1));
  snap.l1_row_err = (snap.r - problem.p()).lpNorm<1>();
  snap.l1_col_err = (snap.c - problem.q()).lpNorm<1>();
  snap.kl_row = KlDivergence(problem.p(), snap.r);
  snap.kl_col = KlDivergence(problem.q(), snap.c);
  return snap;
}

double XMinusLog1p(double x) {
  if (std::abs(x) < 1e-2) {
    // x^2/2 - x^3/3 + x^4/4 - ..., truncated where the next term is below
    // double precision relative to the leading one.
    double term = x * x;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 2; k <= 12; ++k) {
      sum += sign * term / k;
      term *= x;
      sign = -sign;
    }
    return sum;
  }
  return x - std::log1p(x);
}

double KlDivergence(const Vector& p, const Vector& r) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    const double ri = r[i];
    if (pi == 0.0) {
      total += ri;
    } else if (ri == 0.0) {
      return std::numeric_limits<double>::infinity();
    } else {
      total += pi * XMinusLog1p((ri - pi) / pi);
    }
  }
  return total;
}

}  // namespace balancekit
