// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "phc/fem.hpp"
#include "phc/mesh.hpp"
#include "phc/sim.hpp"

namespace phc
{

struct KPathPoint
{
  Quasimomentum k;
  double arclength = 0.0;
};

/// Gamma -> X -> M -> Gamma through the irreducible Brillouin zone.
struct KPath
{
  std::array<Quasimomentum, 4> nodes;
  std::array<const char *, 4> labels{"Γ", "X", "M", "Γ"};
  std::array<double, 4> node_arclength{};
  int nk = 0;
  std::vector<KPathPoint> points;

  double total_length() const { return node_arclength.back(); }
};

/// 3*nk + 1 points, nk per leg plus the closing Gamma. Throws DomainError if nk < 1.
KPath make_kpath(int nk);

/// Rectangle [re_min, re_max] x [im_min, im_max] in the nu-plane.
struct Window
{
  double re_min = 0.02;
  double re_max = 1.3;
  double im_min = -0.05;
  double im_max = 0.05;

  bool contains(Complex z) const;
  /// Throws DomainError unless re_max > re_min and im_max >= im_min.
  void validate() const;
};

/// Covers the window with squares of the given side, padding symmetrically
/// where the window is not a whole number of tiles.
std::vector<SearchRegion> tile_window(const Window &window, double side);

struct SolveOptions
{
  SimConfig sim;
  double initial_side = 0.1;
  double refine_tol = 1e-10;
  int refine_max_iter = 40;

  void validate() const;
};

struct BandValue
{
  Complex nu{};
  double residual = 0.0;
  bool converged = false;
};

struct KSolution
{
  std::vector<BandValue> values;  // sorted by real part
  std::vector<std::string> warnings;
  long indicator_evaluations = 0;
};

/// Mesh, periodic map and region-split assembly for one unit cell.
struct UnitCell
{
  Mesh mesh;
  PeriodicMap pmap;
  std::shared_ptr<const FemAssembly> assembly;

  static UnitCell build(int n, double r, DiscBoundary boundary = DiscBoundary::Conforming);

  OperatorFamily family(Quasimomentum k, Polarization polarization,
                        const RegionModels &models) const;
};

/// Tiles the window, runs the indicator search, refines every candidate and
/// returns the deduplicated eigenvalues that lie inside the window.
KSolution solve_at_k(const OperatorFamily &fam, const Window &window, const SolveOptions &opts);

KSolution solve_at_k(const UnitCell &cell, Quasimomentum k, Polarization polarization,
                     const RegionModels &models, const Window &window, const SolveOptions &opts);

struct SweepConfig
{
  int n = 16;
  double r = 0.0;
  DiscBoundary boundary = DiscBoundary::Conforming;
  Polarization polarization = Polarization::TE;
  RegionModels models;
  Window window;
  SolveOptions options;
  int nk = 16;
  int threads = 1;  // k-points solved concurrently; 0 selects the hardware concurrency
};

struct BandPoint
{
  int index = 0;
  Quasimomentum k;
  double arclength = 0.0;
  std::vector<BandValue> values;
  std::vector<std::string> warnings;
};

struct BandDiagram
{
  std::vector<BandPoint> points;
  KPath path;
  Window window;
  std::vector<std::pair<std::string, std::string>> provenance;

  std::size_t eigenvalue_count() const;
};

/// Solves every path point; per-k failures become warnings on that point.
BandDiagram sweep(const SweepConfig &cfg);

/// Largest problem the dense oracles accept.
inline constexpr int kDenseOracleMaxDofs = 2500;
inline constexpr int kPolynomialOracleMaxDofs = 400;

/// For nondispersive regions: eigenvalues of the generalized problem
/// A v = (2 pi nu)^2 B v, mapped to nu = sqrt(lambda) / (2 pi) (principal
/// branch) and filtered to the window.
std::vector<Complex> dense_linear_oracle(const OperatorFamily &fam, const Window &window);

/// TE with a Constant(1) background and a Drude disc: T(nu) times
/// (nu^2 - i nu nu_tau) is a quartic matrix polynomial, solved through its
/// companion linearization. Roots with Re nu >= 0 inside the window.
std::vector<Complex> drude_polynomial_oracle(const OperatorFamily &fam, const Window &window);

}  // namespace phc
