// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phc/fem.hpp"
#include "phc/sparse.hpp"

namespace phc
{

/// Axis-aligned square in the complex nu-plane.
struct SearchRegion
{
  Complex center{};
  double side = 0.0;

  /// Radius of the circumscribing circle, side / sqrt(2).
  double radius() const;
  /// side * sqrt(2).
  double diameter() const;
  /// Closed-square membership.
  bool contains(Complex z) const;
};

struct SimConfig
{
  double delta0 = 0.01;   // admissibility threshold on the indicator
  double beta0 = 1e-4;    // terminal square diameter
  int m0 = 16;            // trapezoid points per circle
  int max_retries = 3;    // radius enlargements after a failed quadrature point
  std::uint64_t seed = 20240607;
  double dedup_tol = 2e-4;
  // Also test the first contour moment, which sees zeros of T whose inverse
  // has no residue (e.g. the nu = 0 double root of nondispersive problems).
  bool first_moment = false;
  int threads = 1;  // 0 selects the hardware concurrency

  /// Throws DomainError on an invalid combination.
  void validate() const;
};

struct EigenCandidate
{
  Complex nu{};
  double region_side = 0.0;
  std::optional<double> residual;
  int origin = 0;  // index of the initial region the terminal square descends from
};

/// A region whose indicator could not be evaluated; its subtree is dropped.
struct RegionFailure
{
  SearchRegion region;
  int level = 0;
  std::string reason;
};

struct SimResult
{
  std::vector<EigenCandidate> candidates;
  std::vector<RegionFailure> failures;
  long indicator_evaluations = 0;
  int levels = 0;
};

/// Unit-norm vector of complex standard normal entries drawn from seed.
ComplexVector random_probe(int n, std::uint64_t seed);

struct IndicatorValue
{
  double zeroth = 0.0;  // |(1/2 pi i) int T^-1 g|
  double first = 0.0;   // |(1/2 pi i) int ((nu - c)/R) T^-1 g|
  double radius = 0.0;  // radius actually used after retries
  int retries = 0;
};

/// Both contour moments from one set of quadrature solves. Throws SolverError
/// if every radius retry hits a singular quadrature point.
IndicatorValue indicator_moments(const SearchRegion &region, const OperatorFunction &op,
                                 const ComplexVector &g, const SimConfig &cfg);

/// Trapezoid approximation of |(1/2 pi i) int_circle T(nu)^-1 g dnu| over the
/// circle circumscribing the region.
double indicator(const SearchRegion &region, const OperatorFunction &op, const ComplexVector &g,
                 const SimConfig &cfg);

/// Four quadrants of half the side, tiling the parent.
std::array<SearchRegion, 4> subdivide(const SearchRegion &region);

/// Recursive indicator search over pairwise non-overlapping initial squares.
SimResult sim_h(std::span<const SearchRegion> initial, const OperatorFunction &op,
                const SimConfig &cfg);

/// Single-linkage clustering with link distance tol; clusters collapse to
/// their centroid. Output keeps the order of each cluster's first member.
std::vector<EigenCandidate> dedup(std::span<const EigenCandidate> cands, double tol);

struct RefinedEigenpair
{
  Complex nu{};
  ComplexVector v;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// ||T(nu) v|| / (||T(nu)||_F ||v||).
double eigen_residual(const OperatorFunction &op, Complex nu, const ComplexVector &v);

/// Nonlinear inverse iteration with a Newton update of nu on the Rayleigh
/// functional. Not converging within max_iter is reported, not thrown.
RefinedEigenpair refine_eigenpair(Complex nu0, const OperatorFunction &op, double tol,
                                  int max_iter);

}  // namespace phc
