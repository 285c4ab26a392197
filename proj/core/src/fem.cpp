// SPDX-License-Identifier: Apache-2.0

#include "phc/fem.hpp"

#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "phc/error.hpp"

namespace phc
{

namespace
{

using namespace std::complex_literals;

// Closed-form P1 quantities on an affine triangle.
struct ElementGeometry
{
  double area;
  std::array<double, 3> b;  // 2A * d phi_a / dx1
  std::array<double, 3> c;  // 2A * d phi_a / dx2
  std::array<int, 3> dof;
};

ElementGeometry element_geometry(const Mesh &mesh, const PeriodicMap &pmap, std::size_t t)
{
  const Triangle &tri = mesh.triangles[t];
  const Point2 &p0 = mesh.vertices[tri[0]];
  const Point2 &p1 = mesh.vertices[tri[1]];
  const Point2 &p2 = mesh.vertices[tri[2]];
  ElementGeometry e;
  e.area = mesh.signed_area(t);
  e.b = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
  e.c = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
  for (int a = 0; a < 3; a++)
  {
    e.dof[a] = pmap.dof_of_vertex[tri[a]];
  }
  return e;
}

void check_pair(const Mesh &mesh, const PeriodicMap &pmap)
{
  if (pmap.dof_of_vertex.size() != mesh.vertices.size())
  {
    throw DimensionError(fmt::format("periodic map covers {} vertices, mesh has {}",
                                     pmap.dof_of_vertex.size(), mesh.vertices.size()));
  }
  if (mesh.region_of_triangle.size() != mesh.triangles.size())
  {
    throw DimensionError("mesh region tags do not match its triangles");
  }
  for (int dof : pmap.dof_of_vertex)
  {
    if (dof < 0 || dof >= pmap.n_dofs)
    {
      throw DimensionError(fmt::format("periodic DOF {} out of range [0, {})", dof, pmap.n_dofs));
    }
  }
}

Complex tm_inverse(const PermittivityModel &model, Complex nu)
{
  const Complex eps = eval_eps(model, nu);
  if (!check_bounds(model, nu))
  {
    throw BoundsError(fmt::format("|eps({}{:+}i)| = {:.3e} outside [{:.1e}, {:.1e}]", nu.real(),
                                  nu.imag(), std::abs(eps), model.bounds().c0,
                                  model.bounds().c1));
  }
  return 1.0 / eps;
}

}  // namespace

const char *to_string(Polarization p)
{
  return p == Polarization::TE ? "TE" : "TM";
}

FemAssembly::FemAssembly(const Mesh &mesh, const PeriodicMap &pmap) : n_dofs_(pmap.n_dofs)
{
  check_pair(mesh, pmap);

  std::array<std::vector<Triplet>, kNumRegions> s, m, g1, g2;
  for (std::size_t t = 0; t < mesh.triangles.size(); t++)
  {
    const RegionId rho = mesh.region_of_triangle[t];
    if (rho >= kNumRegions)
    {
      throw DimensionError(fmt::format("triangle {} has unknown region {}", t, int(rho)));
    }
    const ElementGeometry e = element_geometry(mesh, pmap, t);
    for (int a = 0; a < 3; a++)
    {
      for (int b = 0; b < 3; b++)
      {
        const int row = e.dof[a];
        const int col = e.dof[b];
        s[rho].push_back({row, col, (e.b[a] * e.b[b] + e.c[a] * e.c[b]) / (4.0 * e.area)});
        m[rho].push_back({row, col, e.area / 12.0 * (a == b ? 2.0 : 1.0)});
        // Row a is the differentiated test function, column b the trial
        // function integrated against it: int phi_b d_j phi_a = (b_a / 2A) * A/3.
        g1[rho].push_back({row, col, e.b[a] / 6.0});
        g2[rho].push_back({row, col, e.c[a] / 6.0});
      }
    }
  }
  for (int rho = 0; rho < kNumRegions; rho++)
  {
    regions_[rho].stiffness = from_triplets(n_dofs_, n_dofs_, s[rho]);
    regions_[rho].mass = from_triplets(n_dofs_, n_dofs_, m[rho]);
    regions_[rho].g1 = from_triplets(n_dofs_, n_dofs_, g1[rho]);
    regions_[rho].g2 = from_triplets(n_dofs_, n_dofs_, g2[rho]);
  }
}

OperatorFamily::OperatorFamily(std::shared_ptr<const FemAssembly> assembly, Quasimomentum k,
                               Polarization polarization, RegionModels models)
  : assembly_(std::move(assembly)), k_(k), polarization_(polarization), models_(std::move(models))
{
  if (!assembly_)
  {
    throw DimensionError("operator family needs an assembly");
  }
  std::vector<SparseMatrix> terms;
  for (int rho = 0; rho < kNumRegions; rho++)
  {
    const RegionMatrices &r = assembly_->region(static_cast<RegionId>(rho));
    const SparseMatrix a1 = this->a1(static_cast<RegionId>(rho));
    const SparseMatrix a2 = a1.transpose();
    const std::array<Complex, 4> coeffs{1.0, 1.0i, -1.0i, k_.norm_squared()};
    const std::array<SparseMatrix, 4> parts{r.stiffness, a1, a2, r.mass};
    kinetic_[rho] = combine(coeffs, parts);
    terms.push_back(kinetic_[rho]);
    terms.push_back(r.mass);
  }
  combination_ = std::make_shared<LinearCombination>(std::move(terms));
  const std::vector<Complex> unit(combination_->size(), Complex(1.0));
  analysis_ = std::make_shared<const SymbolicAnalysis>(analyze(combination_->evaluate(unit)));
}

SparseMatrix OperatorFamily::a1(RegionId rho) const
{
  const RegionMatrices &r = assembly_->region(rho);
  const std::array<Complex, 2> coeffs{k_.k1, k_.k2};
  const std::array<SparseMatrix, 2> parts{r.g1, r.g2};
  return combine(coeffs, parts);
}

SparseMatrix OperatorFamily::a2(RegionId rho) const
{
  return a1(rho).transpose();
}

SparseMatrix OperatorFamily::build_T(Complex nu) const
{
  const Complex omega2 = 4.0 * std::numbers::pi * std::numbers::pi * nu * nu;
  std::array<Complex, 2 * kNumRegions> coeffs;
  for (int rho = 0; rho < kNumRegions; rho++)
  {
    if (polarization_ == Polarization::TE)
    {
      coeffs[2 * rho] = 1.0;
      coeffs[2 * rho + 1] = -omega2 * eval_eps(models_[rho], nu);
    }
    else
    {
      coeffs[2 * rho] = tm_inverse(models_[rho], nu);
      coeffs[2 * rho + 1] = -omega2;
    }
  }
  return combination_->evaluate(coeffs);
}

OperatorFamily assemble_family(const Mesh &mesh, const PeriodicMap &pmap, Quasimomentum k,
                               Polarization polarization, const RegionModels &models)
{
  return OperatorFamily(std::make_shared<const FemAssembly>(mesh, pmap), k, polarization,
                        models);
}

SparseMatrix direct_assembly_check(const Mesh &mesh, const PeriodicMap &pmap, Quasimomentum k,
                                   Polarization polarization, const RegionModels &models,
                                   Complex nu)
{
  check_pair(mesh, pmap);
  const Complex omega2 = 4.0 * std::numbers::pi * std::numbers::pi * nu * nu;
  const double k2 = k.norm_squared();

  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); t++)
  {
    const PermittivityModel &model = models.at(mesh.region_of_triangle[t]);
    Complex form_weight = 1.0;
    Complex mass_weight = omega2;
    if (polarization == Polarization::TE)
    {
      mass_weight *= eval_eps(model, nu);
    }
    else
    {
      form_weight = tm_inverse(model, nu);
    }

    const ElementGeometry e = element_geometry(mesh, pmap, t);
    const double inv2a = 1.0 / (2.0 * e.area);
    for (int a = 0; a < 3; a++)  // test function phi_a
    {
      const double dxa = e.b[a] * inv2a;
      const double dya = e.c[a] * inv2a;
      for (int b = 0; b < 3; b++)  // trial function phi_b
      {
        const double dxb = e.b[b] * inv2a;
        const double dyb = e.c[b] * inv2a;
        const double mass = e.area / 12.0 * (a == b ? 2.0 : 1.0);
        const double third = e.area / 3.0;
        // (grad+ik)phi_b . conj((grad+ik)phi_a) integrated over the element.
        const double grad = e.area * (dxa * dxb + dya * dyb);
        const double k_dot_grad_test = k.k1 * dxa + k.k2 * dya;
        const double k_dot_grad_trial = k.k1 * dxb + k.k2 * dyb;
        const Complex form = grad + 1.0i * third * k_dot_grad_test -
                             1.0i * third * k_dot_grad_trial + k2 * mass;
        entries.push_back({e.dof[a], e.dof[b], form_weight * form - mass_weight * mass});
      }
    }
  }
  return from_triplets(pmap.n_dofs, pmap.n_dofs, entries);
}

}  // namespace phc
