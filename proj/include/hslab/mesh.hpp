#pragma once

// Structured triangulations of the unit square with a rectangular cell
// partition and a measured boundary patch on one side.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "hslab/numerics.hpp"

namespace hslab {

enum class Side { bottom, right, top, left };

const char* side_name(Side s) noexcept;
Side parse_side(const std::string& name);

/// grid_cols x grid_rows tiling of the unit square; cells are labelled
/// 1..N in row-major order starting at the bottom-left.
struct PartitionSpec {
  int grid_cols = 1;
  int grid_rows = 1;

  PartitionSpec() = default;
  PartitionSpec(int cols, int rows);
  int cell_count() const noexcept { return grid_cols * grid_rows; }
};

/// Sub-interval [t0, t1] of one side, in counter-clockwise arclength
/// fractions of that side.
struct PatchSpec {
  Side side = Side::bottom;
  double t0 = 0.0;
  double t1 = 1.0;

  PatchSpec() = default;
  PatchSpec(Side side, double t0, double t1);
};

struct Point {
  double x;
  double y;
};

struct Triangle {
  std::array<std::size_t, 3> nodes;
  int label;  // 1..N
};

struct BoundaryEdge {
  std::array<std::size_t, 2> nodes;  // counter-clockwise along the boundary
  Side side;
  bool on_patch;
};

class Mesh {
 public:
  std::vector<Point> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  int n_sub = 0;
  PartitionSpec partition;
  PatchSpec patch;

  std::size_t node_count() const noexcept { return nodes.size(); }
  int cell_count() const noexcept { return partition.cell_count(); }
  std::size_t patch_edge_count() const;

  /// Signed area of triangle t.
  double area(std::size_t t) const;
  bool on_boundary(std::size_t node) const;
};

/// Throws IncompatibleSubdivision unless n_sub is divisible by both grid
/// dimensions.
Mesh build_mesh(int n_sub, const PartitionSpec& part, const PatchSpec& patch);

/// Patch node indices in arclength order, endpoints included.
std::vector<std::size_t> patch_nodes(const Mesh& mesh);

/// L2 Gram matrix of the patch hat functions, indexed like patch_nodes().
DenseSym boundary_mass_matrix(const Mesh& mesh);

/// Integral of each patch hat function over the patch (row sums of the
/// boundary mass matrix).
Vector patch_hat_integrals(const Mesh& mesh);

/// Plain-text export: "# nodes N" header, N lines "x y", "# triangles T"
/// header, T lines "i j k label" (0-based node indices).
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace hslab
