// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "phc/bands.hpp"
#include "phc/error.hpp"
#include "phc/sim.hpp"
#include "test_support.hpp"

using namespace phc;
using namespace std::complex_literals;
using phc::testing::DiagonalFunction;
using phc::testing::ScalarFunction;

namespace
{

constexpr double kPi = std::numbers::pi;

const ComplexVector kOne = ComplexVector::Ones(1);

SimResult search(const OperatorFunction &op, const Window &w, const SimConfig &cfg,
                 double side = 0.1)
{
  const std::vector<SearchRegion> tiles = tile_window(w, side);
  return sim_h(tiles, op, cfg);
}

}  // namespace

TEST_CASE("search region geometry")
{
  const SearchRegion r{0.5 + 0.25i, 0.2};
  CHECK(r.radius() == doctest::Approx(0.2 / std::sqrt(2.0)));
  CHECK(r.diameter() == doctest::Approx(0.2 * std::sqrt(2.0)));
  CHECK(r.contains(0.6 + 0.35i));
  CHECK(r.contains(0.4 + 0.15i));
  CHECK_FALSE(r.contains(0.61 + 0.25i));
}

TEST_CASE("config validation")
{
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.delta0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{};
  cfg.beta0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{};
  cfg.m0 = 3;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{};
  cfg.dedup_tol = 0.5 * cfg.beta0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("random probe is unit norm and seeded")
{
  const ComplexVector a = random_probe(100, 5);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a == random_probe(100, 5));
  CHECK(a != random_probe(100, 6));
}

TEST_CASE("centered simple pole has unit indicator")
{
  const ScalarFunction op(0.5);
  for (int m0 = 2; m0 <= 32; m0++)
  {
    for (double side : {1e-4, 0.01, 0.3, 2.0})
    {
      SimConfig cfg;
      cfg.m0 = m0;
      CHECK(std::abs(indicator({0.5, side}, op, kOne, cfg) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("outside pole is filtered by the trapezoid rule")
{
  const ScalarFunction op(2.0);
  SimConfig cfg;
  const double value = indicator({0.0, std::sqrt(2.0)}, op, kOne, cfg);
  // (1/16) sum_j e^{i t_j} / (e^{i t_j} - 2) = -2^-16 / (1 - 2^-16), from the geometric series.
  const double closed_form = std::pow(0.5, 16) / (1.0 - std::pow(0.5, 16));
  CHECK(value == doctest::Approx(closed_form).epsilon(1e-9));
  CHECK(value <= 2e-5);
}

TEST_CASE("quadrature through a pole enlarges the circle")
{
  // A pole exactly on the first quadrature point of the nominal circle.
  const double side = 0.2;
  const double radius = side / std::sqrt(2.0);
  const ScalarFunction op(0.5 + radius);
  SimConfig cfg;
  const IndicatorValue iv = indicator_moments({0.5, side}, op, kOne, cfg);
  CHECK(iv.retries == 1);
  CHECK(iv.radius == doctest::Approx(1.05 * radius));
  // The pole now sits inside at distance R from the center of a circle of
  // radius 1.05 R; the trapezoid sum of the residue is 1 / (1 - 1.05^-16).
  CHECK(iv.zeroth == doctest::Approx(1.0 / (1.0 - std::pow(1.05, -16))).epsilon(1e-12));

  cfg.max_retries = 0;
  CHECK_THROWS_AS(indicator({0.5, side}, op, kOne, cfg), SolverError);
}

TEST_CASE("first moment sees a double root")
{
  // T(nu) = nu^2 has no residue at 0; ((nu - c)/R) T^-1 has residue 1/R.
  class Square : public OperatorFunction
  {
  public:
    int size() const override { return 1; }
    SparseMatrix at(Complex nu) const override
    {
      const Triplet t{0, 0, nu * nu};
      return from_triplets(1, 1, std::span<const Triplet>(&t, 1));
    }
  } op;
  SimConfig cfg;
  const IndicatorValue iv = indicator_moments({0.0, 0.1}, op, kOne, cfg);
  CHECK(iv.zeroth < 1e-12);
  CHECK(iv.first == doctest::Approx(1.0 / iv.radius).epsilon(1e-12));
}

TEST_CASE("subdivision into quadrants")
{
  const SearchRegion parent{0.0, 2.0};
  const auto kids = subdivide(parent);
  std::vector<Complex> centers;
  for (const SearchRegion &k : kids)
  {
    CHECK(k.side == 1.0);
    CHECK(k.diameter() == doctest::Approx(parent.diameter() / 2));
    centers.push_back(k.center);
  }
  for (Complex c : {0.5 + 0.5i, 0.5 - 0.5i, -0.5 + 0.5i, -0.5 - 0.5i})
  {
    CHECK(std::find(centers.begin(), centers.end(), c) != centers.end());
  }
  // Points of the parent closure lie in some child closure and vice versa.
  for (double x = -1.0; x <= 1.0; x += 0.125)
  {
    for (double y = -1.0; y <= 1.0; y += 0.125)
    {
      const Complex z(x, y);
      const bool in_child = std::any_of(kids.begin(), kids.end(),
                                        [&](const SearchRegion &k) { return k.contains(z); });
      CHECK(in_child == parent.contains(z));
    }
  }
  CHECK_FALSE(std::any_of(kids.begin(), kids.end(),
                          [](const SearchRegion &k) { return k.contains(1.01); }));
}

TEST_CASE("dedup clusters by single linkage")
{
  CHECK(dedup({}, 2e-4).empty());
  const std::vector<EigenCandidate> close{{0.5, 1e-5}, {0.5 + 1e-5, 1e-5}};
  const auto one = dedup(close, 2e-4);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].nu - (0.5 + 0.5e-5)) < 1e-15);
  const std::vector<EigenCandidate> far{{0.5, 1e-5}, {0.6, 1e-5}};
  CHECK(dedup(far, 2e-4).size() == 2);
  // A chain links transitively.
  const std::vector<EigenCandidate> chain{{0.0, 1e-5}, {1.5e-4, 1e-5}, {3e-4, 1e-5}, {1.0, 1e-5}};
  const auto linked = dedup(chain, 2e-4);
  REQUIRE(linked.size() == 2);
  CHECK(std::abs(linked[0].nu - 1.5e-4) < 1e-15);
  CHECK(linked[1].nu == Complex(1.0));
}

TEST_CASE("search finds scalar poles and respects the precision")
{
  const DiagonalFunction op({0.31 + 0.004i, 0.77 - 0.01i, 1.5});
  SimConfig cfg;
  const SimResult r = search(op, {0.2, 1.0, -0.05, 0.05}, cfg);
  REQUIRE(r.candidates.size() == 2);
  CHECK(std::abs(r.candidates[0].nu - (0.31 + 0.004i)) <= cfg.beta0);
  CHECK(std::abs(r.candidates[1].nu - (0.77 - 0.01i)) <= cfg.beta0);
  for (const EigenCandidate &c : r.candidates)
  {
    CHECK(c.region_side * std::sqrt(2.0) <= cfg.beta0);
  }
  CHECK(r.failures.empty());
}

TEST_CASE("overlapping initial regions are rejected")
{
  const ScalarFunction op(0.5);
  const std::vector<SearchRegion> overlap{{0.5, 0.2}, {0.55, 0.2}};
  CHECK_THROWS_AS(sim_h(overlap, op, SimConfig{}), DomainError);
  const std::vector<SearchRegion> touching{{0.5, 0.2}, {0.7, 0.2}};
  CHECK_NOTHROW(sim_h(touching, op, SimConfig{}));
}

TEST_CASE("candidates stay inside their initial region")
{
  const DiagonalFunction op({0.25, 0.3501 + 0.02i, 0.62, 0.9 - 0.04i});
  SimConfig cfg;
  const std::vector<SearchRegion> tiles = tile_window({0.2, 1.0, -0.05, 0.05}, 0.1);
  const SimResult r = sim_h(tiles, op, cfg);
  CHECK(r.candidates.size() == 4);
  for (const EigenCandidate &c : r.candidates)
  {
    REQUIRE(c.origin >= 0);
    REQUIRE(c.origin < int(tiles.size()));
    const SearchRegion &root = tiles[c.origin];
    CHECK(std::abs(c.nu - root.center) <= root.radius() + cfg.beta0);
  }
}

TEST_CASE("search is deterministic across thread counts")
{
  const UnitCell cell = UnitCell::build(8, 0.3);
  const RegionModels models{PermittivityModel(), PermittivityModel::constant(8.9)};
  const OperatorFamily fam = cell.family({kPi, 0.0}, Polarization::TE, models);
  SimConfig serial;
  SimConfig parallel = serial;
  parallel.threads = 4;
  const Window w{0.2, 0.6, -0.02, 0.02};
  const SimResult a = search(fam, w, serial);
  const SimResult b = search(fam, w, parallel);
  REQUIRE(a.candidates.size() == b.candidates.size());
  CHECK_FALSE(a.candidates.empty());
  for (std::size_t i = 0; i < a.candidates.size(); i++)
  {
    CHECK(a.candidates[i].nu == b.candidates[i].nu);
  }
  CHECK(a.indicator_evaluations == b.indicator_evaluations);
}

TEST_CASE("empty lattice at X: one candidate at one half, refined to high accuracy")
{
  const UnitCell cell = UnitCell::build(16, 0.0);
  const RegionModels vacuum{PermittivityModel(), PermittivityModel()};
  const OperatorFamily fam = cell.family({kPi, 0.0}, Polarization::TE, vacuum);
  SimConfig cfg;
  const SimResult r = search(fam, {0.3, 0.7, -0.05, 0.05}, cfg);
  // The degenerate plane-wave pair splits under discretization: the mode with
  // a constant periodic factor is exact, its partner sits about 2.6% higher.
  const std::vector<Complex> oracle = dense_linear_oracle(fam, {0.3, 0.7, -0.05, 0.05});
  REQUIRE(oracle.size() == 2);
  REQUIRE(r.candidates.size() == 2);
  for (const EigenCandidate &c : r.candidates)
  {
    CHECK(phc::testing::nearest(c.nu, oracle) <= 2 * cfg.beta0);
    CHECK(std::abs(c.nu - 0.5) < 0.03);
    const RefinedEigenpair p = refine_eigenpair(c.nu, fam, 1e-10, 40);
    CHECK(p.residual <= 1e-8);
    CHECK(p.converged);
    CHECK(std::abs(p.nu - c.nu) <= 2 * cfg.beta0);
  }
}

TEST_CASE("empty lattice at Gamma: candidates cluster near one")
{
  const UnitCell cell = UnitCell::build(16, 0.0);
  const RegionModels vacuum{PermittivityModel(), PermittivityModel()};
  const OperatorFamily fam = cell.family({0.0, 0.0}, Polarization::TE, vacuum);
  const SimResult r = search(fam, {0.5, 1.2, -0.05, 0.05}, SimConfig{});
  REQUIRE(!r.candidates.empty());
  for (const EigenCandidate &c : r.candidates)
  {
    CHECK(std::abs(c.nu - 1.0) < 0.01 + 1e-4);
  }
}

TEST_CASE("a window inside a spectral gap yields no candidates")
{
  const std::vector<double> pw = phc::testing::plane_wave_frequencies(kPi, 0.0);
  // Widest gap among the lowest plane-wave values, shrunk by 10% on each side
  // to absorb the discretization error.
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i + 1 < 8; i++)
  {
    if (pw[i + 1] - pw[i] > hi - lo)
    {
      lo = pw[i];
      hi = pw[i + 1];
    }
  }
  REQUIRE(hi - lo > 0.2);
  const double margin = 0.1 * (hi - lo);
  const Window gap{lo + margin, hi - margin, -0.05, 0.05};

  const UnitCell cell = UnitCell::build(16, 0.0);
  const RegionModels vacuum{PermittivityModel(), PermittivityModel()};
  const OperatorFamily fam = cell.family({kPi, 0.0}, Polarization::TE, vacuum);
  for (const Complex nu : dense_linear_oracle(fam, {0.0, 3.0, -1.0, 1.0}))
  {
    CHECK_FALSE(gap.contains(nu));
  }
  CHECK(search(fam, gap, SimConfig{}).candidates.empty());
}

TEST_CASE("indicator separates an eigenvalue from an empty region for many probes")
{
  const UnitCell cell = UnitCell::build(8, 0.0);
  const RegionModels vacuum{PermittivityModel(), PermittivityModel()};
  const OperatorFamily fam = cell.family({kPi, 0.0}, Polarization::TE, vacuum);
  const SearchRegion occupied{0.5, 0.05};
  const SearchRegion empty{0.75, 0.05};
  const std::vector<Complex> oracle = dense_linear_oracle(fam, {0.0, 2.0, -1.0, 1.0});
  CHECK(phc::testing::nearest(0.5, oracle) < 0.005);
  CHECK(phc::testing::nearest(0.75, oracle) > empty.radius());

  // The eigenvalue 0.5 belongs to the constant mode. With the M-normalized
  // eigenvector v = 8 * ones, the contour integral of T^-1 g is
  // v v^H g / (-8 pi^2 nu), so I = 8 |sum g| / (4 pi^2) up to the quadrature
  // contribution of the neighbouring eigenvalue.
  SimConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; seed++)
  {
    const ComplexVector g = random_probe(fam.size(), seed);
    const double expected = 8.0 * std::abs(g.sum()) / (4.0 * kPi * kPi);
    CHECK(indicator(occupied, fam, g, cfg) == doctest::Approx(expected).epsilon(5e-3));
    CHECK(indicator(empty, fam, g, cfg) < cfg.delta0);
  }
}

TEST_CASE("refinement of a scalar root")
{
  const ScalarFunction op(0.5);
  const RefinedEigenpair p = refine_eigenpair(0.5001, op, 1e-12, 20);
  CHECK(std::abs(p.nu - 0.5) < 1e-14);
  CHECK(p.iterations < 20);
  CHECK(std::isfinite(p.residual));
  // For a 1x1 operator |T v| / (|T| |v|) is 1 at every nu except an exact
  // root, so only the value at the root itself is meaningful.
  CHECK(eigen_residual(op, 0.5, p.v) == 0.0);
  CHECK(eigen_residual(op, 0.5, kOne) == 0.0);
}

TEST_CASE("refinement reports non-convergence instead of throwing")
{
  const ScalarFunction op(0.5);
  const RefinedEigenpair p = refine_eigenpair(3.0, op, 1e-300, 0);
  CHECK_FALSE(p.converged);
  CHECK(p.iterations == 0);
}

TEST_CASE("example 2 candidates refine to small residuals")
{
  const UnitCell cell = UnitCell::build(8, filling_fraction_to_radius(0.2827));
  const RegionModels models{PermittivityModel(), PermittivityModel::lossy_drude(1.0, 0.01)};
  const OperatorFamily fam = cell.family({kPi, 0.0}, Polarization::TM, models);
  const SimResult r = search(fam, {0.1, 0.5, -0.05, 0.05}, SimConfig{});
  REQUIRE(!r.candidates.empty());
  for (const EigenCandidate &c : r.candidates)
  {
    const RefinedEigenpair p = refine_eigenpair(c.nu, fam, 1e-10, 40);
    CHECK(p.residual <= 1e-6);
  }
}

TEST_CASE("refinement stays on a root of T in nu squared")
{
  // At Gamma the empty lattice has T(nu) = S - (2 pi nu)^2 M, so nu = 0 is a
  // double root where T' vanishes and the Newton quotient is meaningless.
  const UnitCell cell = UnitCell::build(8, 0.0);
  const RegionModels vacuum{PermittivityModel(), PermittivityModel()};
  const OperatorFamily fam = cell.family({0.0, 0.0}, Polarization::TE, vacuum);
  for (double start : {0.0, -4e-17, 3e-5})
  {
    const RefinedEigenpair p = refine_eigenpair(start, fam, 1e-10, 40);
    CHECK(std::abs(p.nu) <= 1e-4);
    CHECK(p.residual <= 1e-10);
    CHECK(p.converged);
  }
}
