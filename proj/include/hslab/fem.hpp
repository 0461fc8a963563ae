#pragma once

#include <array>
#include <cstddef>

#include "hslab/mesh.hpp"

namespace hslab::fem {

/// Constant gradients of the three P1 hat functions on a triangle.
struct P1Gradients {
  std::array<double, 3> dx;
  std::array<double, 3> dy;
  double area;
};

inline P1Gradients p1_gradients(const Mesh& mesh, std::size_t t) {
  const auto& n = mesh.triangles[t].nodes;
  const Point& p0 = mesh.nodes[n[0]];
  const Point& p1 = mesh.nodes[n[1]];
  const Point& p2 = mesh.nodes[n[2]];
  const double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  P1Gradients g;
  g.area = 0.5 * twice;
  g.dx = {(p1.y - p2.y) / twice, (p2.y - p0.y) / twice, (p0.y - p1.y) / twice};
  g.dy = {(p2.x - p1.x) / twice, (p0.x - p2.x) / twice, (p1.x - p0.x) / twice};
  return g;
}

}  // namespace hslab::fem
