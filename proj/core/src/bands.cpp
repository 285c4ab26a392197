// SPDX-License-Identifier: Apache-2.0

#include "phc/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "parallel.hpp"
#include "phc/error.hpp"

namespace phc
{

KPath make_kpath(int nk)
{
  if (nk < 1)
  {
    throw DomainError(fmt::format("k-path needs at least one sample per leg, got {}", nk));
  }
  constexpr double pi = std::numbers::pi;
  KPath path;
  path.nk = nk;
  path.nodes = {Quasimomentum{0.0, 0.0}, Quasimomentum{pi, 0.0}, Quasimomentum{pi, pi},
                Quasimomentum{0.0, 0.0}};
  path.node_arclength[0] = 0.0;
  for (int leg = 0; leg < 3; leg++)
  {
    const Quasimomentum &a = path.nodes[leg];
    const Quasimomentum &b = path.nodes[leg + 1];
    const double length = std::hypot(b.k1 - a.k1, b.k2 - a.k2);
    for (int s = 0; s < nk; s++)
    {
      const double t = static_cast<double>(s) / nk;
      path.points.push_back({Quasimomentum{a.k1 + t * (b.k1 - a.k1), a.k2 + t * (b.k2 - a.k2)},
                             path.node_arclength[leg] + t * length});
    }
    path.node_arclength[leg + 1] = path.node_arclength[leg] + length;
  }
  path.points.push_back({path.nodes[3], path.node_arclength[3]});
  return path;
}

bool Window::contains(Complex z) const
{
  return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
}

void Window::validate() const
{
  if (!(re_max > re_min) || !(im_max >= im_min))
  {
    throw DomainError(fmt::format("empty search window [{}, {}] x [{}, {}]", re_min, re_max,
                                  im_min, im_max));
  }
}

std::vector<SearchRegion> tile_window(const Window &window, double side)
{
  window.validate();
  if (!(side > 0.0))
  {
    throw DomainError(fmt::format("initial tile side must be positive, got {}", side));
  }
  auto tiles = [side](double lo, double hi)
  {
    const double count = std::ceil((hi - lo) / side - 1e-9);
    return std::max(1, static_cast<int>(count));
  };
  const int n_re = tiles(window.re_min, window.re_max);
  const int n_im = tiles(window.im_min, window.im_max);
  const double re0 = 0.5 * (window.re_min + window.re_max) - 0.5 * n_re * side;
  const double im0 = 0.5 * (window.im_min + window.im_max) - 0.5 * n_im * side;

  std::vector<SearchRegion> out;
  out.reserve(static_cast<std::size_t>(n_re) * n_im);
  for (int j = 0; j < n_im; j++)
  {
    for (int i = 0; i < n_re; i++)
    {
      out.push_back({Complex(re0 + (i + 0.5) * side, im0 + (j + 0.5) * side), side});
    }
  }
  return out;
}

void SolveOptions::validate() const
{
  sim.validate();
  if (!(initial_side > 0.0))
  {
    throw DomainError(fmt::format("initial_side must be positive, got {}", initial_side));
  }
  if (!(refine_tol > 0.0) || refine_max_iter < 1)
  {
    throw DomainError("refinement needs a positive tolerance and at least one iteration");
  }
}

UnitCell UnitCell::build(int n, double r, DiscBoundary boundary)
{
  UnitCell cell;
  cell.mesh = build_unit_cell_mesh(n, r, boundary);
  cell.pmap = build_periodic_dof_map(cell.mesh);
  cell.assembly = std::make_shared<const FemAssembly>(cell.mesh, cell.pmap);
  return cell;
}

OperatorFamily UnitCell::family(Quasimomentum k, Polarization polarization,
                                const RegionModels &models) const
{
  return OperatorFamily(assembly, k, polarization, models);
}

KSolution solve_at_k(const OperatorFamily &fam, const Window &window, const SolveOptions &opts)
{
  opts.validate();
  const std::vector<SearchRegion> regions = tile_window(window, opts.initial_side);
  const SimResult search = sim_h(regions, fam, opts.sim);

  KSolution out;
  out.indicator_evaluations = search.indicator_evaluations;
  for (const RegionFailure &f : search.failures)
  {
    out.warnings.push_back(fmt::format("region {:.6g}{:+.6g}i side {:.3g} dropped: {}",
                                       f.region.center.real(), f.region.center.imag(),
                                       f.region.side, f.reason));
  }

  std::vector<BandValue> refined;
  for (const EigenCandidate &c : search.candidates)
  {
    BandValue value;
    try
    {
      const RefinedEigenpair pair =
          refine_eigenpair(c.nu, fam, opts.refine_tol, opts.refine_max_iter);
      value = {pair.nu, pair.residual, pair.converged};
      if (!pair.converged)
      {
        out.warnings.push_back(fmt::format("refinement from {:.8g}{:+.8g}i stopped at residual "
                                           "{:.3e}",
                                           c.nu.real(), c.nu.imag(), pair.residual));
      }
    }
    catch (const Error &e)
    {
      out.warnings.push_back(fmt::format("refinement from {:.8g}{:+.8g}i failed: {}",
                                         c.nu.real(), c.nu.imag(), e.what()));
      continue;
    }
    if (!window.contains(value.nu))
    {
      continue;
    }
    refined.push_back(value);
  }

  // Candidates that refine onto the same eigenvalue collapse to the best one.
  std::sort(refined.begin(), refined.end(),
            [](const BandValue &a, const BandValue &b)
            {
              return a.nu.real() < b.nu.real() ||
                     (a.nu.real() == b.nu.real() && a.nu.imag() < b.nu.imag());
            });
  for (const BandValue &v : refined)
  {
    auto same = std::find_if(out.values.begin(), out.values.end(), [&](const BandValue &u)
                             { return std::abs(u.nu - v.nu) <= opts.sim.dedup_tol; });
    if (same == out.values.end())
    {
      out.values.push_back(v);
    }
    else if (v.residual < same->residual)
    {
      *same = v;
    }
  }
  return out;
}

KSolution solve_at_k(const UnitCell &cell, Quasimomentum k, Polarization polarization,
                     const RegionModels &models, const Window &window, const SolveOptions &opts)
{
  return solve_at_k(cell.family(k, polarization, models), window, opts);
}

std::size_t BandDiagram::eigenvalue_count() const
{
  std::size_t count = 0;
  for (const BandPoint &p : points)
  {
    count += p.values.size();
  }
  return count;
}

BandDiagram sweep(const SweepConfig &cfg)
{
  cfg.window.validate();
  cfg.options.validate();

  BandDiagram diagram;
  diagram.path = make_kpath(cfg.nk);
  diagram.window = cfg.window;
  const UnitCell cell = UnitCell::build(cfg.n, cfg.r, cfg.boundary);

  diagram.provenance = {
      {"polarization", to_string(cfg.polarization)},
      {"mesh_n", std::to_string(cfg.n)},
      {"radius", fmt::format("{:.17g}", cfg.r)},
      {"disc_boundary", to_string(cfg.boundary)},
      {"n_dofs", std::to_string(cell.pmap.n_dofs)},
      {"background", cfg.models[kBackground].describe()},
      {"disc", cfg.models[kDisc].describe()},
      {"seed", std::to_string(cfg.options.sim.seed)},
  };

  const auto &points = diagram.path.points;
  diagram.points.resize(points.size());
  detail::parallel_for(points.size(), cfg.threads,
                       [&](std::size_t i)
                       {
                         BandPoint &bp = diagram.points[i];
                         bp.index = static_cast<int>(i);
                         bp.k = points[i].k;
                         bp.arclength = points[i].arclength;
                         try
                         {
                           KSolution sol = solve_at_k(cell, bp.k, cfg.polarization, cfg.models,
                                                      cfg.window, cfg.options);
                           bp.values = std::move(sol.values);
                           bp.warnings = std::move(sol.warnings);
                         }
                         catch (const Error &e)
                         {
                           bp.warnings.push_back(fmt::format("k-point failed: {}", e.what()));
                         }
                       });
  return diagram;
}

}  // namespace phc
