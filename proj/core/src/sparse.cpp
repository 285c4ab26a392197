// SPDX-License-Identifier: Apache-2.0

#include "phc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <umfpack.h>
#include <fmt/format.h>

#include "phc/error.hpp"

namespace phc
{

SparseMatrix::SparseMatrix(int n_rows, int n_cols) : storage_(n_rows, n_cols)
{
  storage_.makeCompressed();
}

SparseMatrix::SparseMatrix(Storage storage) : storage_(std::move(storage))
{
  storage_.makeCompressed();
}

SparseMatrix SparseMatrix::transpose() const
{
  return SparseMatrix(Storage(storage_.transpose()));
}

SparseMatrix SparseMatrix::adjoint() const
{
  return SparseMatrix(Storage(storage_.adjoint()));
}

std::vector<Triplet> SparseMatrix::triplets() const
{
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(nnz()));
  for (int col = 0; col < storage_.outerSize(); col++)
  {
    for (Storage::InnerIterator it(storage_, col); it; ++it)
    {
      out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    }
  }
  return out;
}

SparseMatrix from_triplets(int n_rows, int n_cols, std::span<const Triplet> triplets)
{
  if (n_rows < 0 || n_cols < 0)
  {
    throw DimensionError(fmt::format("invalid matrix dimensions {}x{}", n_rows, n_cols));
  }
  std::vector<Eigen::Triplet<Complex, int>> entries;
  entries.reserve(triplets.size());
  for (const Triplet &t : triplets)
  {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
    {
      throw DimensionError(fmt::format("triplet ({}, {}) out of range for a {}x{} matrix", t.row,
                                       t.col, n_rows, n_cols));
    }
    entries.emplace_back(t.row, t.col, t.value);
  }
  SparseMatrix::Storage storage(n_rows, n_cols);
  storage.setFromTriplets(entries.begin(), entries.end());
  return SparseMatrix(std::move(storage));
}

LinearCombination::LinearCombination(std::vector<SparseMatrix> mats) : mats_(std::move(mats))
{
  if (mats_.empty())
  {
    throw DimensionError("linear combination of an empty matrix list");
  }
  const int n_rows = mats_.front().rows();
  const int n_cols = mats_.front().cols();
  for (const SparseMatrix &m : mats_)
  {
    if (m.rows() != n_rows || m.cols() != n_cols)
    {
      throw DimensionError(fmt::format("cannot combine a {}x{} matrix with a {}x{} matrix",
                                       m.rows(), m.cols(), n_rows, n_cols));
    }
  }

  // Union pattern, column by column.
  std::vector<std::vector<int>> rows_of_col(static_cast<std::size_t>(n_cols));
  for (const SparseMatrix &m : mats_)
  {
    const auto &s = m.storage();
    for (int col = 0; col < n_cols; col++)
    {
      for (int p = s.outerIndexPtr()[col]; p < s.outerIndexPtr()[col + 1]; p++)
      {
        rows_of_col[col].push_back(s.innerIndexPtr()[p]);
      }
    }
  }
  std::vector<Eigen::Triplet<Complex, int>> zeros;
  for (int col = 0; col < n_cols; col++)
  {
    auto &rows = rows_of_col[col];
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (int row : rows)
    {
      zeros.emplace_back(row, col, Complex{});
    }
  }
  SparseMatrix::Storage pattern(n_rows, n_cols);
  pattern.setFromTriplets(zeros.begin(), zeros.end());
  pattern_ = SparseMatrix(std::move(pattern));

  const auto &u = pattern_.storage();
  slot_.reserve(mats_.size());
  for (const SparseMatrix &m : mats_)
  {
    const auto &s = m.storage();
    std::vector<int> slot(static_cast<std::size_t>(s.nonZeros()));
    for (int col = 0; col < n_cols; col++)
    {
      const int *begin = u.innerIndexPtr() + u.outerIndexPtr()[col];
      const int *end = u.innerIndexPtr() + u.outerIndexPtr()[col + 1];
      for (int p = s.outerIndexPtr()[col]; p < s.outerIndexPtr()[col + 1]; p++)
      {
        const int *hit = std::lower_bound(begin, end, s.innerIndexPtr()[p]);
        slot[p] = static_cast<int>(hit - u.innerIndexPtr());
      }
    }
    slot_.push_back(std::move(slot));
  }
}

SparseMatrix LinearCombination::evaluate(std::span<const Complex> coeffs) const
{
  if (coeffs.size() != mats_.size())
  {
    throw DimensionError(fmt::format("expected {} coefficients, got {}", mats_.size(),
                                     coeffs.size()));
  }
  SparseMatrix::Storage out = pattern_.storage();
  Complex *values = out.valuePtr();
  std::fill(values, values + out.nonZeros(), Complex{});
  for (std::size_t j = 0; j < mats_.size(); j++)
  {
    const Complex c = coeffs[j];
    const Complex *src = mats_[j].storage().valuePtr();
    const std::vector<int> &slot = slot_[j];
    for (std::size_t p = 0; p < slot.size(); p++)
    {
      values[slot[p]] += c * src[p];
    }
  }
  return SparseMatrix(std::move(out));
}

SparseMatrix combine(std::span<const Complex> coeffs, std::span<const SparseMatrix> mats)
{
  if (coeffs.size() != mats.size())
  {
    throw DimensionError(fmt::format("{} coefficients for {} matrices", coeffs.size(),
                                     mats.size()));
  }
  return LinearCombination(std::vector<SparseMatrix>(mats.begin(), mats.end())).evaluate(coeffs);
}

namespace
{

// UMFPACK takes complex values as interleaved (re, im) pairs when the
// imaginary-part pointer is null.
const double *interleaved(const Complex *p)
{
  return reinterpret_cast<const double *>(p);
}

void require_square(const SparseMatrix &a)
{
  if (a.rows() != a.cols())
  {
    throw DimensionError(fmt::format("matrix is {}x{}, expected square", a.rows(), a.cols()));
  }
}

std::vector<double> default_control()
{
  std::vector<double> control(UMFPACK_CONTROL);
  umfpack_zi_defaults(control.data());
  // The solve does not keep the numeric values around.
  control[UMFPACK_IRSTEP] = 0;
  return control;
}

}  // namespace

struct SymbolicAnalysis::Impl
{
  int n = 0;
  std::vector<int> outer;
  std::vector<int> inner;
  std::vector<double> control = default_control();
  void *handle = nullptr;

  Impl() = default;
  Impl(const Impl &) = delete;
  Impl &operator=(const Impl &) = delete;
  ~Impl()
  {
    if (handle != nullptr)
    {
      umfpack_zi_free_symbolic(&handle);
    }
  }

  bool matches(const SparseMatrix::Storage &s) const
  {
    if (s.rows() != n || s.cols() != n || s.nonZeros() != static_cast<long>(inner.size()))
    {
      return false;
    }
    return std::equal(outer.begin(), outer.end(), s.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), s.innerIndexPtr());
  }
};

bool SymbolicAnalysis::matches(const SparseMatrix &a) const
{
  return impl_ != nullptr && impl_->matches(a.storage());
}

SymbolicAnalysis analyze(const SparseMatrix &a)
{
  require_square(a);
  SparseMatrix::Storage s = a.storage();
  s.makeCompressed();
  auto impl = std::make_shared<SymbolicAnalysis::Impl>();
  impl->n = a.rows();
  impl->outer.assign(s.outerIndexPtr(), s.outerIndexPtr() + s.cols() + 1);
  impl->inner.assign(s.innerIndexPtr(), s.innerIndexPtr() + s.nonZeros());
  if (impl->n > 0)
  {
    std::vector<double> info(UMFPACK_INFO);
    const int status =
        umfpack_zi_symbolic(impl->n, impl->n, impl->outer.data(), impl->inner.data(),
                            interleaved(s.valuePtr()), nullptr, &impl->handle,
                            impl->control.data(), info.data());
    if (status != UMFPACK_OK)
    {
      throw SolverError(fmt::format("symbolic analysis failed (UMFPACK status {})", status));
    }
  }
  SymbolicAnalysis out;
  out.impl_ = std::move(impl);
  return out;
}

struct Factorization::Impl
{
  std::shared_ptr<const SymbolicAnalysis::Impl> symbolic;
  void *numeric = nullptr;
  long factor_nnz = 0;

  Impl() = default;
  Impl(const Impl &) = delete;
  Impl &operator=(const Impl &) = delete;
  ~Impl()
  {
    if (numeric != nullptr)
    {
      umfpack_zi_free_numeric(&numeric);
    }
  }
};

long Factorization::factor_nnz() const
{
  return impl_ ? impl_->factor_nnz : 0;
}

Factorization factorize(const SparseMatrix &a, const SymbolicAnalysis *analysis)
{
  require_square(a);
  if (a.rows() > 0 && a.nnz() == 0)
  {
    throw SingularityError("matrix has no stored entries");
  }
  SymbolicAnalysis local;
  if (analysis == nullptr || !analysis->matches(a))
  {
    local = analyze(a);
    analysis = &local;
  }
  Factorization f;
  f.n_ = a.rows();
  auto impl = std::make_shared<Factorization::Impl>();
  impl->symbolic = analysis->impl_;
  if (f.n_ == 0)
  {
    f.rcond_ = 1.0;
    f.impl_ = std::move(impl);
    return f;
  }

  const SymbolicAnalysis::Impl &sym = *impl->symbolic;
  const SparseMatrix::Storage &s = a.storage();
  const Complex *values = s.valuePtr();
  SparseMatrix::Storage compressed;
  if (!s.isCompressed())
  {
    compressed = s;
    compressed.makeCompressed();
    values = compressed.valuePtr();
  }
  std::vector<double> info(UMFPACK_INFO);
  const int status = umfpack_zi_numeric(sym.outer.data(), sym.inner.data(), interleaved(values),
                                        nullptr, sym.handle, &impl->numeric, sym.control.data(),
                                        info.data());
  if (status == UMFPACK_WARNING_singular_matrix)
  {
    throw SingularityError("matrix is exactly singular");
  }
  if (status != UMFPACK_OK)
  {
    throw SolverError(fmt::format("numeric factorization failed (UMFPACK status {})", status));
  }
  f.rcond_ = info[UMFPACK_RCOND];
  if (!(f.rcond_ >= kPivotTolerance))
  {
    throw SingularityError(
        fmt::format("matrix is numerically singular (pivot ratio {:.3e})", f.rcond_));
  }
  impl->factor_nnz = static_cast<long>(info[UMFPACK_LNZ] + info[UMFPACK_UNZ]);
  f.impl_ = std::move(impl);
  return f;
}

ComplexVector Factorization::solve(const ComplexVector &b) const
{
  if (b.size() != n_)
  {
    throw DimensionError(fmt::format("right-hand side has length {}, expected {}", b.size(), n_));
  }
  if (n_ == 0)
  {
    return ComplexVector();
  }
  const SymbolicAnalysis::Impl &sym = *impl_->symbolic;
  ComplexVector x(n_);
  std::vector<double> info(UMFPACK_INFO);
  const int status = umfpack_zi_solve(UMFPACK_A, sym.outer.data(), sym.inner.data(), nullptr,
                                      nullptr, reinterpret_cast<double *>(x.data()), nullptr,
                                      reinterpret_cast<const double *>(b.data()), nullptr,
                                      impl_->numeric, sym.control.data(), info.data());
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
  {
    throw SolverError(fmt::format("triangular solve failed (UMFPACK status {})", status));
  }
  return x;
}

ComplexVector solve(const Factorization &f, const ComplexVector &b)
{
  return f.solve(b);
}

}  // namespace phc
