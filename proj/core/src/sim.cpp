// SPDX-License-Identifier: Apache-2.0

#include "phc/sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "parallel.hpp"
#include "phc/error.hpp"

namespace phc
{

namespace
{

constexpr double kRetryScale = 1.05;

bool interiors_overlap(const SearchRegion &a, const SearchRegion &b)
{
  const double reach = 0.5 * (a.side + b.side);
  const double slack = 1e-12 * std::max({1.0, std::abs(a.center), std::abs(b.center)});
  return std::abs(a.center.real() - b.center.real()) < reach - slack &&
         std::abs(a.center.imag() - b.center.imag()) < reach - slack;
}

}  // namespace

double SearchRegion::radius() const
{
  return side / std::numbers::sqrt2;
}

double SearchRegion::diameter() const
{
  return side * std::numbers::sqrt2;
}

bool SearchRegion::contains(Complex z) const
{
  const double h = 0.5 * side;
  return std::abs(z.real() - center.real()) <= h && std::abs(z.imag() - center.imag()) <= h;
}

void SimConfig::validate() const
{
  if (!(delta0 > 0.0))
  {
    throw DomainError(fmt::format("delta0 must be positive, got {}", delta0));
  }
  if (!(beta0 > 0.0))
  {
    throw DomainError(fmt::format("beta0 must be positive, got {}", beta0));
  }
  if (m0 < 4)
  {
    throw DomainError(fmt::format("m0 must be at least 4, got {}", m0));
  }
  if (max_retries < 0)
  {
    throw DomainError(fmt::format("max_retries must be nonnegative, got {}", max_retries));
  }
  if (!(dedup_tol >= beta0))
  {
    throw DomainError(fmt::format("dedup_tol ({}) must be >= beta0 ({})", dedup_tol, beta0));
  }
}

ComplexVector random_probe(int n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVector g(n);
  for (int i = 0; i < n; i++)
  {
    const double re = normal(rng);
    const double im = normal(rng);
    g[i] = Complex(re, im);
  }
  const double norm = g.norm();
  if (norm > 0.0)
  {
    g /= norm;
  }
  return g;
}

IndicatorValue indicator_moments(const SearchRegion &region, const OperatorFunction &op,
                                 const ComplexVector &g, const SimConfig &cfg)
{
  if (!(region.side > 0.0))
  {
    throw DomainError(fmt::format("search region side must be positive, got {}", region.side));
  }
  if (cfg.m0 < 1)
  {
    throw DomainError(fmt::format("m0 must be positive, got {}", cfg.m0));
  }
  if (g.size() != op.size())
  {
    throw DimensionError(fmt::format("probe vector has length {}, operator size is {}", g.size(),
                                     op.size()));
  }
  if (g.norm() == 0.0)
  {
    throw DomainError("probe vector must be nonzero");
  }

  double radius = region.radius();
  std::string last_failure;
  for (int attempt = 0; attempt <= cfg.max_retries; attempt++, radius *= kRetryScale)
  {
    ComplexVector zeroth = ComplexVector::Zero(g.size());
    ComplexVector first = ComplexVector::Zero(g.size());
    try
    {
      for (int j = 0; j < cfg.m0; j++)
      {
        const double theta = 2.0 * std::numbers::pi * j / cfg.m0;
        const Complex phase = std::polar(1.0, theta);
        const ComplexVector x = factorize(op.at(region.center + radius * phase), op.analysis()).solve(g);
        zeroth += phase * x;
        first += (phase * phase) * x;
      }
    }
    catch (const SingularityError &e)
    {
      last_failure = e.what();
      continue;
    }
    catch (const BoundsError &e)
    {
      last_failure = e.what();
      continue;
    }
    const double scale = radius / cfg.m0;
    return {scale * zeroth.norm(), scale * first.norm(), radius, attempt};
  }
  throw SolverError(fmt::format("indicator failed on region center {}{:+}i side {} after {} "
                                "retries: {}",
                                region.center.real(), region.center.imag(), region.side,
                                cfg.max_retries, last_failure));
}

double indicator(const SearchRegion &region, const OperatorFunction &op, const ComplexVector &g,
                 const SimConfig &cfg)
{
  return indicator_moments(region, op, g, cfg).zeroth;
}

std::array<SearchRegion, 4> subdivide(const SearchRegion &region)
{
  const double q = 0.25 * region.side;
  const double h = 0.5 * region.side;
  const Complex c = region.center;
  return {SearchRegion{c + Complex(-q, -q), h}, SearchRegion{c + Complex(q, -q), h},
          SearchRegion{c + Complex(-q, q), h}, SearchRegion{c + Complex(q, q), h}};
}

SimResult sim_h(std::span<const SearchRegion> initial, const OperatorFunction &op,
                const SimConfig &cfg)
{
  cfg.validate();
  for (std::size_t a = 0; a < initial.size(); a++)
  {
    if (!(initial[a].side > 0.0))
    {
      throw DomainError(fmt::format("initial region {} has nonpositive side", a));
    }
    for (std::size_t b = a + 1; b < initial.size(); b++)
    {
      if (interiors_overlap(initial[a], initial[b]))
      {
        throw DomainError(fmt::format("initial regions {} and {} overlap", a, b));
      }
    }
  }

  // One probe vector for every region and level.
  const ComplexVector g = random_probe(op.size(), cfg.seed);

  struct Node
  {
    SearchRegion region;
    int origin;
  };
  std::vector<Node> level;
  level.reserve(initial.size());
  for (std::size_t i = 0; i < initial.size(); i++)
  {
    level.push_back({initial[i], static_cast<int>(i)});
  }

  SimResult result;
  int depth = 0;
  while (!level.empty())
  {
    struct Outcome
    {
      double value = 0.0;
      std::optional<std::string> error;
    };
    std::vector<Outcome> outcome(level.size());
    detail::parallel_for(level.size(), cfg.threads,
                         [&](std::size_t i)
                         {
                           try
                           {
                             const IndicatorValue iv =
                                 indicator_moments(level[i].region, op, g, cfg);
                             outcome[i].value =
                                 cfg.first_moment ? std::max(iv.zeroth, iv.first) : iv.zeroth;
                           }
                           catch (const SolverError &e)
                           {
                             outcome[i].error = e.what();
                           }
                         });
    result.indicator_evaluations += static_cast<long>(level.size());

    std::vector<Node> next;
    for (std::size_t i = 0; i < level.size(); i++)
    {
      const Node &node = level[i];
      if (outcome[i].error)
      {
        result.failures.push_back({node.region, depth, *outcome[i].error});
        continue;
      }
      if (!(outcome[i].value > cfg.delta0))
      {
        continue;
      }
      if (node.region.diameter() > cfg.beta0)
      {
        for (const SearchRegion &child : subdivide(node.region))
        {
          next.push_back({child, node.origin});
        }
      }
      else
      {
        result.candidates.push_back(
            {node.region.center, node.region.side, std::nullopt, node.origin});
      }
    }
    level = std::move(next);
    depth++;
  }
  result.levels = depth;
  result.candidates = dedup(result.candidates, cfg.dedup_tol);
  return result;
}

std::vector<EigenCandidate> dedup(std::span<const EigenCandidate> cands, double tol)
{
  const std::size_t n = cands.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i)
  {
    while (parent[i] != i)
    {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (std::size_t a = 0; a < n; a++)
  {
    for (std::size_t b = a + 1; b < n; b++)
    {
      if (std::abs(cands[a].nu - cands[b].nu) <= tol)
      {
        const std::size_t ra = find(a);
        const std::size_t rb = find(b);
        if (ra != rb)
        {
          parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
    }
  }

  // Roots are the smallest index of their cluster, so visiting in index
  // order emits clusters in order of first appearance.
  std::vector<EigenCandidate> out;
  std::vector<std::size_t> slot(n, n);
  std::vector<int> members;
  for (std::size_t i = 0; i < n; i++)
  {
    const std::size_t root = find(i);
    if (slot[root] == n)
    {
      slot[root] = out.size();
      out.push_back(cands[i]);
      out.back().nu = 0.0;
      out.back().region_side = 0.0;
      members.push_back(0);
    }
    EigenCandidate &c = out[slot[root]];
    c.nu += cands[i].nu;
    c.region_side = std::max(c.region_side, cands[i].region_side);
    members[slot[root]]++;
  }
  for (std::size_t k = 0; k < out.size(); k++)
  {
    out[k].nu /= static_cast<double>(members[k]);
  }
  return out;
}

double eigen_residual(const OperatorFunction &op, Complex nu, const ComplexVector &v)
{
  const SparseMatrix t = op.at(nu);
  const double denom = t.frobenius_norm() * v.norm();
  return denom > 0.0 ? (t * v).norm() / denom : 0.0;
}

RefinedEigenpair refine_eigenpair(Complex nu0, const OperatorFunction &op, double tol,
                                  int max_iter)
{
  // Deterministic start vector; the first inverse-iteration solve aligns it
  // with the eigenvector closest to nu0.
  constexpr std::uint64_t kStartSeed = 0x9e3779b97f4a7c15ull;
  // Besides the residual test, the Newton update must have settled. The
  // residual alone cannot pin down a multiple root.
  constexpr double kStepTol = 1e-8;
  // Candidates arrive within beta0 of a root; longer Newton steps are noise.
  constexpr double kTrustRadius = 1e-2;

  RefinedEigenpair out;
  out.nu = nu0;

  auto solve_near = [&](Complex nu, const ComplexVector &rhs)
  {
    // A numerically singular T(nu) means nu already is an eigenvalue to
    // working precision; nudge it to extract the null direction. A root of
    // T in nu^2 needs the square root of the pivot tolerance as offset.
    for (double offset : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4})
    {
      try
      {
        return factorize(op.at(nu + offset * std::max(1.0, std::abs(nu))), op.analysis())
            .solve(rhs);
      }
      catch (const SingularityError &)
      {
      }
    }
    throw SolverError("refinement could not factorize T near the eigenvalue");
  };

  ComplexVector v = solve_near(out.nu, random_probe(op.size(), kStartSeed));
  v.normalize();

  for (int it = 0; it <= max_iter; it++)
  {
    const SparseMatrix t = op.at(out.nu);
    const ComplexVector tv = t * v;
    out.residual = tv.norm() / std::max(t.frobenius_norm(), 1e-300);
    out.iterations = it;

    const double h = 1e-6 * std::max(1.0, std::abs(out.nu));
    const ComplexVector dtv = (op.at(out.nu + h) * v - op.at(out.nu - h) * v) / (2.0 * h);
    const Complex denom = v.dot(dtv);  // v^H T' v
    const Complex step = denom != 0.0 ? v.dot(tv) / denom : Complex{};
    const double scale = std::max(1.0, std::abs(out.nu));
    // Where T' degenerates (a root of T in nu^2) the Newton quotient is
    // roundoff over roundoff; fall back to plain inverse iteration.
    const bool trusted = denom != 0.0 && std::abs(step) <= kTrustRadius * scale;

    if (out.residual <= tol && (!trusted || std::abs(step) <= kStepTol * scale))
    {
      out.converged = true;
      break;
    }
    // Once the update is below the resolution of nu the iterate cannot move.
    const bool stalled =
        trusted && std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * scale;
    if (stalled || it == max_iter)
    {
      out.converged = out.residual <= tol;
      break;
    }
    if (trusted)
    {
      out.nu -= step;
      v = solve_near(out.nu, dtv);
    }
    else
    {
      v = solve_near(out.nu, v);
    }
    v.normalize();
  }
  out.v = std::move(v);
  out.residual = eigen_residual(op, out.nu, out.v);
  out.converged = out.converged && out.residual <= tol;
  return out;
}

}  // namespace phc
