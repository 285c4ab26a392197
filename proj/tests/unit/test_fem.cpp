// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include <numbers>

#include <Eigen/Eigenvalues>

#include "phc/error.hpp"
#include "phc/fem.hpp"
#include "phc/mesh.hpp"
#include "test_support.hpp"

using namespace phc;
using namespace std::complex_literals;
using phc::testing::max_abs_diff;

namespace
{

constexpr double kPi = std::numbers::pi;

struct Cell
{
  Mesh mesh;
  PeriodicMap pmap;
  std::shared_ptr<const FemAssembly> assembly;
};

Cell make_cell(int n, double r)
{
  Cell c;
  c.mesh = build_unit_cell_mesh(n, r);
  c.pmap = build_periodic_dof_map(c.mesh);
  c.assembly = std::make_shared<const FemAssembly>(c.mesh, c.pmap);
  return c;
}

RegionModels vacuum()
{
  return {PermittivityModel(), PermittivityModel()};
}

RegionModels drude_disc()
{
  return {PermittivityModel(), PermittivityModel::drude(1.0, 0.01)};
}

DenseMatrix total_kinetic(const OperatorFamily &fam)
{
  return fam.kinetic(kBackground).to_dense() + fam.kinetic(kDisc).to_dense();
}

DenseMatrix total_mass(const OperatorFamily &fam)
{
  return fam.mass(kBackground).to_dense() + fam.mass(kDisc).to_dense();
}

double relative_gap(const DenseMatrix &a, const DenseMatrix &b)
{
  return (a - b).norm() / std::max(a.norm(), 1e-300);
}

}  // namespace

TEST_CASE("mass entries sum to the cell area")
{
  const Cell c = make_cell(1, 0.0);
  CHECK(c.assembly->region(kBackground).mass.to_dense().sum().real() ==
        doctest::Approx(1.0).epsilon(1e-14));
  const Cell d = make_cell(7, 0.3);
  const DenseMatrix m = d.assembly->region(kBackground).mass.to_dense() +
                        d.assembly->region(kDisc).mass.to_dense();
  CHECK(m.sum().real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(d.assembly->region(kDisc).mass.to_dense().sum().real() ==
        doctest::Approx(d.mesh.region_area(kDisc)).epsilon(1e-13));
}

TEST_CASE("constants lie in the kernel of stiffness and of the derivative couplings")
{
  for (int n : {2, 5})
  {
    const Cell c = make_cell(n, 0.3);
    const ComplexVector one = ComplexVector::Ones(c.pmap.n_dofs);
    DenseMatrix s = DenseMatrix::Zero(c.pmap.n_dofs, c.pmap.n_dofs);
    DenseMatrix g1 = s, g2 = s;
    for (RegionId rho : {kBackground, kDisc})
    {
      s += c.assembly->region(rho).stiffness.to_dense();
      g1 += c.assembly->region(rho).g1.to_dense();
      g2 += c.assembly->region(rho).g2.to_dense();
    }
    CHECK((s * one).norm() < 1e-12);
    CHECK((g1 * one).norm() < 1e-12);
    CHECK((g2 * one).norm() < 1e-12);
    CHECK((one.transpose() * g1).norm() < 1e-12);
  }
}

TEST_CASE("TE vacuum at Gamma and nu = 0 is the stiffness matrix")
{
  const Cell c = make_cell(4, 0.0);
  const OperatorFamily fam(c.assembly, {0.0, 0.0}, Polarization::TE, vacuum());
  const DenseMatrix t = fam.build_T(0.0).to_dense();
  CHECK(max_abs_diff(t, c.assembly->region(kBackground).stiffness.to_dense()) < 1e-14);
  CHECK((t * ComplexVector::Ones(16)).norm() < 1e-13);
}

TEST_CASE("kinetic form is Hermitian positive semidefinite")
{
  const Cell c = make_cell(4, 0.3);
  for (Quasimomentum k : {Quasimomentum{0.0, 0.0}, Quasimomentum{kPi, 0.0},
                          Quasimomentum{1.0, 0.5}, Quasimomentum{-2.0, kPi}})
  {
    const OperatorFamily fam(c.assembly, k, Polarization::TE, vacuum());
    const DenseMatrix kk = total_kinetic(fam);
    CHECK(max_abs_diff(kk, kk.adjoint()) < 1e-14);
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(kk);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    const double nu = 0.43;
    const DenseMatrix expected = kk - std::pow(2 * kPi * nu, 2) * total_mass(fam);
    CHECK(relative_gap(fam.build_T(nu).to_dense(), expected) < 1e-14);
  }
}

TEST_CASE("kinetic form at Gamma has a one dimensional kernel")
{
  const Cell c = make_cell(6, 0.25);
  const OperatorFamily fam(c.assembly, {0.0, 0.0}, Polarization::TE, vacuum());
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(total_kinetic(fam));
  CHECK(std::abs(eig.eigenvalues()[0]) < 1e-10);
  CHECK(eig.eigenvalues()[1] > 1e-3);
}

TEST_CASE("derivative couplings are transposes and form a Hermitian term")
{
  const Cell c = make_cell(5, 0.3);
  const OperatorFamily fam(c.assembly, {1.3, -0.4}, Polarization::TE, drude_disc());
  for (RegionId rho : {kBackground, kDisc})
  {
    const SparseMatrix a1 = fam.a1(rho);
    const SparseMatrix a2 = fam.a2(rho);
    const SparseMatrix a1t = a1.transpose();
    REQUIRE(a2.nnz() == a1t.nnz());
    const auto &s2 = a2.storage();
    const auto &st = a1t.storage();
    CHECK(std::equal(s2.outerIndexPtr(), s2.outerIndexPtr() + s2.cols() + 1, st.outerIndexPtr()));
    CHECK(std::equal(s2.innerIndexPtr(), s2.innerIndexPtr() + s2.nonZeros(), st.innerIndexPtr()));
    CHECK(max_abs_diff(a2.to_dense(), a1t.to_dense()) <= 1e-14);

    const DenseMatrix h = 1i * (a1.to_dense() - a2.to_dense());
    CHECK(max_abs_diff(h, h.adjoint()) < 1e-14);
    CHECK(a1.to_dense().imag().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("lossless TE operator is Hermitian at real frequencies")
{
  const Cell c = make_cell(5, 0.3);
  const RegionModels models{PermittivityModel(), PermittivityModel::constant(8.9)};
  const OperatorFamily fam(c.assembly, {kPi, 0.7}, Polarization::TE, models);
  for (double nu : {0.1, 0.55, 1.2})
  {
    const DenseMatrix t = fam.build_T(nu).to_dense();
    CHECK(max_abs_diff(t, t.adjoint()) < 1e-12);
  }
}

TEST_CASE("region matrices add up to the single region assembly")
{
  const Cell split = make_cell(6, 0.3);
  Mesh untagged = split.mesh;
  std::fill(untagged.region_of_triangle.begin(), untagged.region_of_triangle.end(), kBackground);
  Cell whole;
  whole.assembly = std::make_shared<const FemAssembly>(untagged, split.pmap);
  for (auto member : {&RegionMatrices::stiffness, &RegionMatrices::mass, &RegionMatrices::g1,
                      &RegionMatrices::g2})
  {
    const DenseMatrix total = (split.assembly->region(kBackground).*member).to_dense() +
                              (split.assembly->region(kDisc).*member).to_dense();
    const DenseMatrix single = (whole.assembly->region(kBackground).*member).to_dense();
    CHECK(max_abs_diff(total, single) <= 1e-14 * std::max(1.0, single.cwiseAbs().maxCoeff()));
    CHECK(whole.assembly->region(kDisc).stiffness.to_dense().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("TM with eps = 4 everywhere halves the vacuum frequencies")
{
  const Cell c = make_cell(4, 0.0);
  const Quasimomentum k{kPi, 0.4};
  const RegionModels four{PermittivityModel::constant(4.0), PermittivityModel::constant(4.0)};
  const OperatorFamily te(c.assembly, k, Polarization::TE, vacuum());
  const OperatorFamily tm(c.assembly, k, Polarization::TM, four);

  // Generalized Hermitian problem K v = lambda M v, solved independently.
  const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> vac(total_kinetic(te),
                                                                   total_mass(te));
  for (int j = 0; j < 5; j++)
  {
    const double nu_te = std::sqrt(vac.eigenvalues()[j]) / (2 * kPi);
    const DenseMatrix t = tm.build_T(nu_te / 2).to_dense();
    const Eigen::JacobiSVD<DenseMatrix> svd(t);
    const double smallest = svd.singularValues().minCoeff();
    CHECK(smallest < 1e-10 * svd.singularValues().maxCoeff());
  }
  const double nu = 0.31;
  const DenseMatrix expected = 0.25 * total_kinetic(te) - std::pow(2 * kPi * nu, 2) * total_mass(te);
  CHECK(relative_gap(tm.build_T(nu).to_dense(), expected) < 1e-14);
}

TEST_CASE("direct assembly agrees with the region split family")
{
  const Cell c = make_cell(4, 0.3);
  const Quasimomentum k{1.0, 0.5};
  const Complex nu = 0.37 + 0.01i;
  for (Polarization pol : {Polarization::TE, Polarization::TM})
  {
    const OperatorFamily fam(c.assembly, k, pol, drude_disc());
    const DenseMatrix direct = direct_assembly_check(c.mesh, c.pmap, k, pol, drude_disc(), nu).to_dense();
    CHECK(relative_gap(fam.build_T(nu).to_dense(), direct) <= 1e-12);
  }
  const OperatorFamily vac(c.assembly, k, Polarization::TE, vacuum());
  const DenseMatrix expected =
      total_kinetic(vac) - std::pow(2.0 * kPi * nu, 2) * total_mass(vac);
  const DenseMatrix direct =
      direct_assembly_check(c.mesh, c.pmap, k, Polarization::TE, vacuum(), nu).to_dense();
  CHECK(relative_gap(direct, expected) <= 1e-12);
  CHECK(relative_gap(vac.build_T(nu).to_dense(), expected) <= 1e-12);
}

TEST_CASE("opposite quasimomentum gives the conjugate operator")
{
  const Cell c = make_cell(6, 0.3);
  const RegionModels models{PermittivityModel(), PermittivityModel::drude(1.0, 0.0)};
  const OperatorFamily plus(c.assembly, {1.1, -0.6}, Polarization::TE, models);
  const OperatorFamily minus(c.assembly, {-1.1, 0.6}, Polarization::TE, models);
  for (double nu : {0.2, 0.77, 1.25})
  {
    const DenseMatrix a = minus.build_T(nu).to_dense();
    const DenseMatrix b = plus.build_T(nu).to_dense().conjugate();
    CHECK(max_abs_diff(a, b) <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("laws are checked where the operator is evaluated")
{
  const Cell c = make_cell(3, 0.3);
  const RegionModels lossless{PermittivityModel(), PermittivityModel::drude(1.0, 0.0)};
  const OperatorFamily te(c.assembly, {kPi, 0.0}, Polarization::TE, lossless);
  CHECK_THROWS_AS(te.build_T(0.0), SingularityError);
  CHECK_NOTHROW(te.build_T(1.0));
  const OperatorFamily tm(c.assembly, {kPi, 0.0}, Polarization::TM, lossless);
  CHECK_THROWS_AS(tm.build_T(1.0), BoundsError);
  CHECK_NOTHROW(tm.build_T(0.8));
}

TEST_CASE("assembly rejects a map from another mesh")
{
  const Mesh m = build_unit_cell_mesh(4, 0.2);
  const PeriodicMap p = build_periodic_dof_map(build_unit_cell_mesh(3, 0.2));
  CHECK_THROWS_AS(FemAssembly(m, p), DimensionError);
  CHECK(to_string(Polarization::TE) == std::string("TE"));
  CHECK(to_string(Polarization::TM) == std::string("TM"));
}
