// SPDX-License-Identifier: Apache-2.0

// Dense reference solvers. They ignore the contour machinery entirely and are
// only practical for small meshes.

#include <numbers>
#include <variant>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "phc/bands.hpp"
#include "phc/error.hpp"

namespace phc
{

namespace
{

using namespace std::complex_literals;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Complex> in_window(const Eigen::VectorXcd &roots, const Window &window)
{
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < roots.size(); i++)
  {
    const Complex nu = roots[i];
    if (std::isfinite(nu.real()) && std::isfinite(nu.imag()) && nu.real() >= 0.0 &&
        window.contains(nu))
    {
      out.push_back(nu);
    }
  }
  std::sort(out.begin(), out.end(),
            [](Complex a, Complex b) { return a.real() < b.real(); });
  return out;
}

}  // namespace

std::vector<Complex> dense_linear_oracle(const OperatorFamily &fam, const Window &window)
{
  const int n = fam.n_dofs();
  if (n > kDenseOracleMaxDofs)
  {
    throw DomainError(fmt::format("dense oracle is capped at {} DOFs, problem has {}",
                                  kDenseOracleMaxDofs, n));
  }
  DenseMatrix a = DenseMatrix::Zero(n, n);
  DenseMatrix b = DenseMatrix::Zero(n, n);
  for (int rho = 0; rho < kNumRegions; rho++)
  {
    const PermittivityModel &model = fam.model(static_cast<RegionId>(rho));
    const auto *law = std::get_if<law::Constant>(&model.law());
    if (law == nullptr)
    {
      throw DomainError("dense linear oracle needs a constant permittivity in every region");
    }
    const DenseMatrix k = fam.kinetic(static_cast<RegionId>(rho)).to_dense();
    const DenseMatrix m = fam.mass(static_cast<RegionId>(rho)).to_dense();
    if (fam.polarization() == Polarization::TE)
    {
      a += k;
      b += law->eps * m;
    }
    else
    {
      a += k / law->eps;
      b += m;
    }
  }
  const DenseMatrix op = b.partialPivLu().solve(a);
  Eigen::ComplexEigenSolver<DenseMatrix> eig(op, false);
  if (eig.info() != Eigen::Success)
  {
    throw SolverError("dense eigenvalue computation did not converge");
  }
  Eigen::VectorXcd nu = eig.eigenvalues().cwiseSqrt() / kTwoPi;
  return in_window(nu, window);
}

std::vector<Complex> drude_polynomial_oracle(const OperatorFamily &fam, const Window &window)
{
  const int n = fam.n_dofs();
  if (n > kPolynomialOracleMaxDofs)
  {
    throw DomainError(fmt::format("polynomial oracle is capped at {} DOFs, problem has {}",
                                  kPolynomialOracleMaxDofs, n));
  }
  if (fam.polarization() != Polarization::TE)
  {
    throw DomainError("polynomial oracle is only defined for TE");
  }
  const auto *background = std::get_if<law::Constant>(&fam.model(kBackground).law());
  const auto *drude = std::get_if<law::Drude>(&fam.model(kDisc).law());
  if (background == nullptr || background->eps != Complex(1.0) || drude == nullptr)
  {
    throw DomainError("polynomial oracle needs a vacuum background and a Drude disc");
  }

  // T(nu) (nu^2 - i nu nu_tau) = sum_p nu^p A_p with
  //   A4 = -4 pi^2 M, A3 = 4 pi^2 i nu_tau M, A2 = K + 4 pi^2 nu_p^2 M1,
  //   A1 = -i nu_tau K, A0 = 0.
  const double four_pi2 = kTwoPi * kTwoPi;
  const DenseMatrix k = fam.kinetic(kBackground).to_dense() + fam.kinetic(kDisc).to_dense();
  const DenseMatrix m1 = fam.mass(kDisc).to_dense();
  const DenseMatrix m = fam.mass(kBackground).to_dense() + m1;
  const double nu_p2 = drude->nu_p * drude->nu_p;

  const std::array<DenseMatrix, 4> lower{
      DenseMatrix::Zero(n, n),
      -1.0i * drude->nu_tau * k,
      k + four_pi2 * nu_p2 * m1,
      four_pi2 * 1.0i * drude->nu_tau * m,
  };
  const auto lead = (-four_pi2 * m).eval().partialPivLu();

  DenseMatrix companion = DenseMatrix::Zero(4 * n, 4 * n);
  for (int blk = 0; blk < 3; blk++)
  {
    companion.block(blk * n, (blk + 1) * n, n, n).setIdentity();
  }
  for (int blk = 0; blk < 4; blk++)
  {
    companion.block(3 * n, blk * n, n, n) = -lead.solve(lower[blk]);
  }
  Eigen::ComplexEigenSolver<DenseMatrix> eig(companion, false);
  if (eig.info() != Eigen::Success)
  {
    throw SolverError("companion eigenvalue computation did not converge");
  }
  return in_window(eig.eigenvalues(), window);
}

}  // namespace phc
