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

// Problem data shared by every module: the nonnegative matrix A, the
// balancing triple (A, p, q), the scaling pair (d0, d1) and the marginal
// snapshot of the scaled matrix D1 A D0.
//
// Conventions used throughout the library:
//   * d0 has one entry per column of A, d1 one entry per row.
//   * The scaled matrix is A_hat(i, j) = d1[i] * A(i, j) * d0[j].
//   * r = A_hat 1 (row sums, compared against p); c = A_hat^T 1 (column
//     sums, compared against q).

#ifndef BALANCEKIT_CORE_H_
#define BALANCEKIT_CORE_H_

#include <optional>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "Eigen/SparseCore"

namespace balancekit {

using Vector = Eigen::VectorXd;

struct MatrixEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Entrywise nonnegative matrix kept in compressed row storage. Zeros are never
// stored, so the sparsity pattern is the zero pattern of the matrix.
class NonnegMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  // Duplicate (row, col) entries are summed, explicit zeros are dropped.
  // Throws kInvalidValue for negative or non-finite values, kDimensionMismatch
  // for out-of-range indices or empty shapes and kZeroRowOrColumn when some row
  // or column has no positive entry.
  static NonnegMatrix FromEntries(int n_rows, int n_cols,
                                  std::span<const MatrixEntry> entries);
  static NonnegMatrix FromDense(const Eigen::MatrixXd& dense);
  // Takes ownership of already-assembled storage after the same validation.
  static NonnegMatrix FromStorage(Storage storage);

  int rows() const { return static_cast<int>(storage_.rows()); }
  int cols() const { return static_cast<int>(storage_.cols()); }
  int nonzeros() const { return static_cast<int>(storage_.nonZeros()); }
  const Storage& storage() const { return storage_; }

  Vector Multiply(const Vector& x) const;            // A x
  Vector MultiplyTransposed(const Vector& y) const;  // A^T y
  Vector RowSums() const;
  Vector ColSums() const;
  double Coeff(int row, int col) const { return storage_.coeff(row, col); }
  double MaxEntry() const;
  double Sum() const;

  Eigen::MatrixXd ToDense() const;
  std::vector<MatrixEntry> Entries() const;

  template <typename Fn>
  void ForEachNonzero(Fn&& fn) const {
    for (int i = 0; i < storage_.outerSize(); ++i) {
      for (Storage::InnerIterator it(storage_, i); it; ++it) {
        fn(i, static_cast<int>(it.col()), it.value());
      }
    }
  }

 private:
  explicit NonnegMatrix(Storage storage) : storage_(std::move(storage)) {}

  Storage storage_;
};

// Whether a problem may carry zero target marginals. Plain Sinkhorn needs
// strictly positive targets; the Gamma-regularized iteration and the
// feasibility checker also accept zeros (an item that is never chosen).
enum class MarginalPolicy { kStrictlyPositive, kAllowZero };

class BalancingProblem {
 public:
  const NonnegMatrix& a() const { return a_; }
  const Vector& p() const { return p_; }
  const Vector& q() const { return q_; }
  int rows() const { return a_.rows(); }
  int cols() const { return a_.cols(); }

  // q was multiplied by this factor at construction so that sum(p) == sum(q).
  double q_rescale() const { return q_rescale_; }
  bool strictly_positive() const { return strictly_positive_; }
  double total_mass() const { return p_.sum(); }

  // Minimum potential value g* used by PotentialValue::gap_to_reference.
  std::optional<double> reference_potential() const { return g_star_; }
  BalancingProblem WithReferencePotential(double g_star) const;

 private:
  BalancingProblem(NonnegMatrix a, Vector p, Vector q)
      : a_(std::move(a)), p_(std::move(p)), q_(std::move(q)) {}
  friend BalancingProblem BuildProblem(NonnegMatrix, Vector, Vector,
                                       MarginalPolicy);

  NonnegMatrix a_;
  Vector p_;
  Vector q_;
  double q_rescale_ = 1.0;
  bool strictly_positive_ = true;
  std::optional<double> g_star_;
};

// Relative tolerance on |sum(p) - sum(q)| below which q is rescaled instead of
// rejected.
inline constexpr double kMarginalSumRelTol = 1e-12;

// Validates and assembles (A, p, q). Errors: kDimensionMismatch,
// kNonpositiveMarginal, kMarginalSumMismatch, kInvalidValue.
BalancingProblem BuildProblem(NonnegMatrix a, Vector p, Vector q,
                              MarginalPolicy policy =
                                  MarginalPolicy::kStrictlyPositive);

struct ScalingState {
  Vector d0;  // column scaling, length n_cols
  Vector d1;  // row scaling, length n_rows
  int iteration = 0;

  static ScalingState Ones(const BalancingProblem& problem);
};

// Throws kDimensionMismatch / kInvalidValue if the state does not fit the
// problem or holds non-positive or non-finite entries.
void ValidateState(const BalancingProblem& problem, const ScalingState& state);

struct MarginalSnapshot {
  Vector r;  // row sums of the scaled matrix
  Vector c;  // column sums of the scaled matrix
  double l1_row_err = 0.0;
  double l1_col_err = 0.0;
  double kl_row = 0.0;  // D(p || r)
  double kl_col = 0.0;  // D(q || c)
};

// D1 A D0 with the zero pattern of A. Throws kNumericOverflow if an entry
// underflows to zero or overflows.
NonnegMatrix ScaledMatrix(const BalancingProblem& problem,
                          const ScalingState& state);

MarginalSnapshot Marginals(const BalancingProblem& problem,
                           const ScalingState& state);

// Generalized Kullback-Leibler divergence sum_i p_i log(p_i/r_i) - p_i + r_i.
// Equals the ordinary KL divergence whenever sum(p) == sum(r). Each term is
// evaluated in a cancellation-free form; 0 log 0 = 0 and the result is +inf
// when some r_i = 0 < p_i.
double KlDivergence(const Vector& p, const Vector& r);

// x - log(1 + x), accurate near zero.
double XMinusLog1p(double x);

}  // namespace balancekit

#endif  // BALANCEKIT_CORE_H_
