// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace phc
{

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;

struct Triplet
{
  int row = 0;
  int col = 0;
  Complex value{};
};

//
// Compressed complex sparse matrix. Explicitly stored zeros are kept so that
// linear combinations of a fixed set of matrices always share one pattern.
//
class SparseMatrix
{
public:
  using Storage = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols);
  explicit SparseMatrix(Storage storage);

  int rows() const { return static_cast<int>(storage_.rows()); }
  int cols() const { return static_cast<int>(storage_.cols()); }
  long nnz() const { return storage_.nonZeros(); }

  const Storage &storage() const { return storage_; }

  /// Stored value at (row, col), or 0 if the entry is not in the pattern.
  Complex coeff(int row, int col) const { return storage_.coeff(row, col); }

  double frobenius_norm() const { return storage_.norm(); }
  ComplexVector operator*(const ComplexVector &x) const { return storage_ * x; }

  SparseMatrix transpose() const;
  SparseMatrix adjoint() const;
  DenseMatrix to_dense() const { return DenseMatrix(storage_); }

  /// Entries as triplets in storage order.
  std::vector<Triplet> triplets() const;

private:
  Storage storage_;
};

/// Duplicates are summed. Throws DimensionError on an out-of-range index.
SparseMatrix from_triplets(int n_rows, int n_cols, std::span<const Triplet> triplets);

//
// Precomputed union pattern of a fixed list of equally sized matrices.
// evaluate(c) returns sum_j c[j] * mats[j] by scattering into the union
// pattern in input order, so repeated evaluations are cheap and bitwise
// reproducible.
//
class LinearCombination
{
public:
  explicit LinearCombination(std::vector<SparseMatrix> mats);

  std::size_t size() const { return mats_.size(); }
  int rows() const { return pattern_.rows(); }
  int cols() const { return pattern_.cols(); }

  SparseMatrix evaluate(std::span<const Complex> coeffs) const;

private:
  std::vector<SparseMatrix> mats_;
  SparseMatrix pattern_;
  std::vector<std::vector<int>> slot_;
};

/// Entrywise sum of coeffs[j] * mats[j]. Throws DimensionError on mismatch.
SparseMatrix combine(std::span<const Complex> coeffs, std::span<const SparseMatrix> mats);

class Factorization;
class SymbolicAnalysis;
SymbolicAnalysis analyze(const SparseMatrix &a);
Factorization factorize(const SparseMatrix &a, const SymbolicAnalysis *analysis);

//
// Fill-reducing ordering and symbolic structure of one sparsity pattern,
// reusable for every matrix sharing that pattern. Immutable and shareable
// across threads.
//
class SymbolicAnalysis
{
public:
  bool matches(const SparseMatrix &a) const;

  struct Impl;

private:
  friend SymbolicAnalysis analyze(const SparseMatrix &a);
  friend Factorization factorize(const SparseMatrix &a, const SymbolicAnalysis *analysis);
  std::shared_ptr<const Impl> impl_;
};

/// Throws DimensionError if not square.
SymbolicAnalysis analyze(const SparseMatrix &a);

//
// Sparse LU with partial pivoting (UMFPACK). Immutable once built; concurrent
// solves on one object are safe.
//
class Factorization
{
public:
  /// Smallest over largest magnitude of the U diagonal.
  double rcond() const { return rcond_; }
  int size() const { return n_; }
  /// Stored entries of L and U together.
  long factor_nnz() const;

  ComplexVector solve(const ComplexVector &b) const;

  struct Impl;

private:
  friend Factorization factorize(const SparseMatrix &a, const SymbolicAnalysis *analysis);
  std::shared_ptr<const Impl> impl_;
  int n_ = 0;
  double rcond_ = 0.0;
};

/// Pivot ratios below this mark a matrix singular.
inline constexpr double kPivotTolerance = 1e-14;

/// Throws DimensionError if not square, SingularityError if numerically
/// singular. A null or mismatched analysis is recomputed from the pattern.
Factorization factorize(const SparseMatrix &a, const SymbolicAnalysis *analysis = nullptr);

/// Throws DimensionError on a length mismatch.
ComplexVector solve(const Factorization &f, const ComplexVector &b);

}  // namespace phc
