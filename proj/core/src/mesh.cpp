// SPDX-License-Identifier: Apache-2.0

#include "phc/mesh.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "phc/error.hpp"

namespace phc
{

double Mesh::signed_area(std::size_t t) const
{
  const auto &[a, b, c] = triangles[t];
  const Point2 &p0 = vertices[a];
  const Point2 &p1 = vertices[b];
  const Point2 &p2 = vertices[c];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double Mesh::region_area(RegionId region) const
{
  double area = 0.0;
  for (std::size_t t = 0; t < triangles.size(); t++)
  {
    if (region_of_triangle[t] == region)
    {
      area += signed_area(t);
    }
  }
  return area;
}

namespace
{

// Smallest triangle area a snapped vertex may leave behind, relative to an
// unperturbed grid triangle.
constexpr double kMinSnappedArea = 0.05;

void snap_to_circle(Mesh &mesh)
{
  const int n = mesh.n;
  const int stride = n + 1;
  const double r = mesh.r;
  auto offset = [&](int v)
  { return std::hypot(mesh.vertices[v][0] - 0.5, mesh.vertices[v][1] - 0.5) - r; };

  std::vector<std::vector<std::size_t>> incident(mesh.vertices.size());
  std::vector<char> marked(mesh.vertices.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); t++)
  {
    const Triangle &tri = mesh.triangles[t];
    for (int e = 0; e < 3; e++)
    {
      incident[tri[e]].push_back(t);
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      const double da = offset(a);
      const double db = offset(b);
      if (da * db <= 0.0)
      {
        marked[std::abs(da) <= std::abs(db) ? a : b] = 1;
      }
    }
  }

  const double min_area = kMinSnappedArea * 0.5 / (double(n) * n);
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); v++)
  {
    const int i = v % stride;
    const int j = v / stride;
    if (!marked[v] || i == 0 || j == 0 || i == n || j == n)
    {
      continue;
    }
    const Point2 before = mesh.vertices[v];
    const double dx = before[0] - 0.5;
    const double dy = before[1] - 0.5;
    const double d = std::hypot(dx, dy);
    if (d == 0.0)
    {
      continue;
    }
    mesh.vertices[v] = {0.5 + dx * r / d, 0.5 + dy * r / d};
    for (std::size_t t : incident[v])
    {
      if (mesh.signed_area(t) < min_area)
      {
        mesh.vertices[v] = before;
        break;
      }
    }
  }
}

}  // namespace

const char *to_string(DiscBoundary b)
{
  return b == DiscBoundary::Conforming ? "conforming" : "staircase";
}

Mesh build_unit_cell_mesh(int n, double r, DiscBoundary boundary)
{
  if (n < 1)
  {
    throw DomainError(fmt::format("mesh subdivision n must be >= 1, got {}", n));
  }
  if (!(r >= 0.0) || !(r < 0.5))
  {
    throw GeometryError(
        fmt::format("disc radius must satisfy 0 <= r < 0.5 (disc inside the cell), got {}", r));
  }

  Mesh mesh;
  mesh.n = n;
  mesh.r = r;
  mesh.boundary = boundary;

  const int stride = n + 1;
  mesh.vertices.reserve(static_cast<std::size_t>(stride) * stride);
  for (int j = 0; j <= n; j++)
  {
    for (int i = 0; i <= n; i++)
    {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }

  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  mesh.region_of_triangle.reserve(2 * static_cast<std::size_t>(n) * n);
  const double r2 = r * r;
  auto tag = [&](const Triangle &tri)
  {
    double cx = 0.0, cy = 0.0;
    for (int v : tri)
    {
      cx += mesh.vertices[v][0];
      cy += mesh.vertices[v][1];
    }
    cx = cx / 3.0 - 0.5;
    cy = cy / 3.0 - 0.5;
    return (cx * cx + cy * cy < r2) ? kDisc : kBackground;
  };

  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      const int v00 = j * stride + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + stride;
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  if (boundary == DiscBoundary::Conforming && r > 0.0)
  {
    snap_to_circle(mesh);
  }
  for (const Triangle &tri : mesh.triangles)
  {
    mesh.region_of_triangle.push_back(tag(tri));
  }
  return mesh;
}

PeriodicMap build_periodic_dof_map(const Mesh &mesh)
{
  const int n = mesh.n;
  if (n < 1)
  {
    throw TopologyError("mesh has no grid subdivision");
  }
  const auto stride = static_cast<std::size_t>(n + 1);
  if (mesh.vertices.size() != stride * stride)
  {
    throw TopologyError(fmt::format("expected {} vertices for a structured {}x{} grid, got {}",
                                    stride * stride, n, n, mesh.vertices.size()));
  }

  // Opposite edges must carry the same offsets for the identification to be
  // a bijection. Structured grids produce bitwise-identical coordinates.
  for (std::size_t s = 0; s <= static_cast<std::size_t>(n); s++)
  {
    const Point2 &left = mesh.vertices[s * stride];
    const Point2 &right = mesh.vertices[s * stride + n];
    const Point2 &bottom = mesh.vertices[s];
    const Point2 &top = mesh.vertices[n * stride + s];
    if (left[1] != right[1] || left[0] != 0.0 || right[0] != 1.0)
    {
      throw TopologyError(fmt::format("left/right boundary vertices disagree at row {}", s));
    }
    if (bottom[0] != top[0] || bottom[1] != 0.0 || top[1] != 1.0)
    {
      throw TopologyError(fmt::format("bottom/top boundary vertices disagree at column {}", s));
    }
  }

  PeriodicMap pmap;
  pmap.n_dofs = n * n;
  pmap.dof_of_vertex.resize(mesh.vertices.size());
  for (int j = 0; j <= n; j++)
  {
    for (int i = 0; i <= n; i++)
    {
      pmap.dof_of_vertex[j * (n + 1) + i] = (j % n) * n + (i % n);
    }
  }
  return pmap;
}

double filling_fraction_to_radius(double f)
{
  if (!(f >= 0.0) || !(f < std::numbers::pi / 4.0))
  {
    throw DomainError(fmt::format("filling fraction must satisfy 0 <= f < pi/4, got {}", f));
  }
  return std::sqrt(f / std::numbers::pi);
}

void write_mesh_dump(const Mesh &mesh, std::ostream &os)
{
  for (const auto &[x, y] : mesh.vertices)
  {
    os << fmt::format("v {:.17g} {:.17g}\n", x, y);
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); t++)
  {
    const auto &[a, b, c] = mesh.triangles[t];
    os << fmt::format("t {} {} {} {}\n", a, b, c, static_cast<int>(mesh.region_of_triangle[t]));
  }
}

}  // namespace phc
