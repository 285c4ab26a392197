// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>

#include "phc/materials.hpp"
#include "phc/mesh.hpp"
#include "phc/sparse.hpp"

namespace phc
{

enum class Polarization
{
  TE,
  TM
};

const char *to_string(Polarization p);

/// Bloch wave vector, each component in the Brillouin zone [-pi, pi].
struct Quasimomentum
{
  double k1 = 0.0;
  double k2 = 0.0;

  double norm_squared() const { return k1 * k1 + k2 * k2; }
};

/// One material model per region, indexed by RegionId.
using RegionModels = std::array<PermittivityModel, kNumRegions>;

/// k-independent P1 matrices restricted to the elements of one region.
struct RegionMatrices
{
  SparseMatrix stiffness;  // (grad phi_n, grad phi_m)
  SparseMatrix mass;       // (phi_n, phi_m)
  SparseMatrix g1;         // (phi_n, d phi_m / dx1)
  SparseMatrix g2;         // (phi_n, d phi_m / dx2)
};

//
// Region-split P1 assembly on the periodic DOFs of a unit-cell mesh. Built once
// per mesh and shared by every quasimomentum of a sweep.
//
class FemAssembly
{
public:
  FemAssembly(const Mesh &mesh, const PeriodicMap &pmap);

  int n_dofs() const { return n_dofs_; }
  const RegionMatrices &region(RegionId rho) const { return regions_[rho]; }

private:
  int n_dofs_ = 0;
  std::array<RegionMatrices, kNumRegions> regions_;
};

/// Matrix-valued function nu -> T(nu), the interface the eigensolvers consume.
class OperatorFunction
{
public:
  virtual ~OperatorFunction() = default;
  virtual int size() const = 0;
  virtual SparseMatrix at(Complex nu) const = 0;
  /// Symbolic analysis shared by every at(nu), if the pattern is fixed.
  virtual const SymbolicAnalysis *analysis() const { return nullptr; }
};

//
// T(nu) for one quasimomentum and polarization:
//
//   TE: sum_rho K_rho(k) - (2 pi nu)^2 sum_rho eps_rho(nu) M_rho
//   TM: sum_rho eps_rho(nu)^-1 K_rho(k) - (2 pi nu)^2 sum_rho M_rho
//
// with K_rho(k) = S_rho + i A1_rho - i A1_rho^T + |k|^2 M_rho and
// A1_rho = k1 G1_rho + k2 G2_rho.
//
class OperatorFamily : public OperatorFunction
{
public:
  OperatorFamily(std::shared_ptr<const FemAssembly> assembly, Quasimomentum k,
                 Polarization polarization, RegionModels models);

  Polarization polarization() const { return polarization_; }
  const Quasimomentum &k() const { return k_; }
  const RegionModels &models() const { return models_; }
  const PermittivityModel &model(RegionId rho) const { return models_[rho]; }
  const FemAssembly &assembly() const { return *assembly_; }
  int n_dofs() const { return assembly_->n_dofs(); }

  /// A1 = k1 G1 + k2 G2 restricted to region rho (real valued).
  SparseMatrix a1(RegionId rho) const;
  /// A2 = A1^T.
  SparseMatrix a2(RegionId rho) const;
  /// K_rho(k), Hermitian positive semidefinite.
  const SparseMatrix &kinetic(RegionId rho) const { return kinetic_[rho]; }
  const SparseMatrix &mass(RegionId rho) const { return assembly_->region(rho).mass; }

  /// Throws SingularityError at a pole of a region law and, for TM, BoundsError
  /// when some |eps_rho(nu)| leaves its admissible window.
  SparseMatrix build_T(Complex nu) const;

  int size() const override { return n_dofs(); }
  SparseMatrix at(Complex nu) const override { return build_T(nu); }
  const SymbolicAnalysis *analysis() const override { return analysis_.get(); }

private:
  std::shared_ptr<const FemAssembly> assembly_;
  Quasimomentum k_;
  Polarization polarization_;
  RegionModels models_;
  std::array<SparseMatrix, kNumRegions> kinetic_;
  std::shared_ptr<const LinearCombination> combination_;
  std::shared_ptr<const SymbolicAnalysis> analysis_;
};

OperatorFamily assemble_family(const Mesh &mesh, const PeriodicMap &pmap, Quasimomentum k,
                               Polarization polarization, const RegionModels &models);

inline SparseMatrix build_T(const OperatorFamily &fam, Complex nu) { return fam.build_T(nu); }

/// Monolithic assembly of T(nu) with eps baked into every element. Shares no
/// code path with FemAssembly; used to cross-check it.
SparseMatrix direct_assembly_check(const Mesh &mesh, const PeriodicMap &pmap, Quasimomentum k,
                                   Polarization polarization, const RegionModels &models,
                                   Complex nu);

}  // namespace phc
