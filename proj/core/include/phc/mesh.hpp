// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace phc
{

using RegionId = std::uint8_t;

inline constexpr RegionId kBackground = 0;
inline constexpr RegionId kDisc = 1;
inline constexpr int kNumRegions = 2;

using Point2 = std::array<double, 2>;
using Triangle = std::array<int, 3>;

enum class DiscBoundary
{
  Conforming,
  Staircase
};

const char *to_string(DiscBoundary b);

//
// Structured triangulation of the unit cell (0,1)^2 with a disc of radius r
// centered at (0.5, 0.5). Vertex (i, j) sits at (i/n, j/n) and has index
// j*(n+1) + i. Each grid square is split along its lower-left to upper-right
// diagonal; both triangles are counterclockwise.
//
// With a conforming boundary, interior grid vertices next to the circle are
// pulled radially onto it, so the tagged disc follows the circle instead of a
// staircase of grid edges. The topology and the cell boundary are unchanged.
//
struct Mesh
{
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<RegionId> region_of_triangle;
  int n = 0;
  double r = 0.0;
  DiscBoundary boundary = DiscBoundary::Conforming;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  /// Signed area of triangle t (positive for counterclockwise).
  double signed_area(std::size_t t) const;

  /// Total area of the triangles tagged with the given region.
  double region_area(RegionId region) const;
};

/// Identification of opposite boundary vertices onto shared periodic DOFs.
struct PeriodicMap
{
  std::vector<int> dof_of_vertex;
  int n_dofs = 0;
};

/// Builds the n x n structured unit-cell mesh. Throws GeometryError unless
/// 0 <= r < 0.5, DomainError if n < 1.
Mesh build_unit_cell_mesh(int n, double r, DiscBoundary boundary = DiscBoundary::Conforming);

/// Throws TopologyError if the mesh is not a structured unit-cell grid whose
/// opposite boundary vertices match.
PeriodicMap build_periodic_dof_map(const Mesh &mesh);

/// r = sqrt(f / pi) for a unit lattice constant. Requires 0 <= f < pi/4.
double filling_fraction_to_radius(double f);

/// Plain-text dump: "v x y" per vertex, then "t i j k region" per triangle.
void write_mesh_dump(const Mesh &mesh, std::ostream &os);

}  // namespace phc
