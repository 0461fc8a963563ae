#include "hslab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hslab/errors.hpp"

namespace hslab {

const char* side_name(Side s) noexcept {
  switch (s) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "bottom";
}

Side parse_side(const std::string& name) {
  if (name == "bottom") return Side::bottom;
  if (name == "right") return Side::right;
  if (name == "top") return Side::top;
  if (name == "left") return Side::left;
  fail(ErrorCode::InvalidArgument, "unknown side '" + name + "'");
}

PartitionSpec::PartitionSpec(int cols, int rows) : grid_cols(cols), grid_rows(rows) {
  if (cols < 1 || rows < 1) fail(ErrorCode::InvalidArgument, "partition needs at least one column and row");
}

PatchSpec::PatchSpec(Side s, double a, double b) : side(s), t0(a), t1(b) {
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0))
    fail(ErrorCode::InvalidArgument, "patch interval must satisfy 0 <= t0 < t1 <= 1");
}

std::size_t Mesh::patch_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(boundary_edges.begin(), boundary_edges.end(), [](const auto& e) { return e.on_patch; }));
}

double Mesh::area(std::size_t t) const {
  const auto& tri = triangles[t].nodes;
  const Point& a = nodes[tri[0]];
  const Point& b = nodes[tri[1]];
  const Point& c = nodes[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

bool Mesh::on_boundary(std::size_t node) const {
  const std::size_t m = static_cast<std::size_t>(n_sub) + 1;
  const std::size_t i = node % m;
  const std::size_t j = node / m;
  return i == 0 || j == 0 || i + 1 == m || j + 1 == m;
}

namespace {

// Arclength fraction of point p along side s (counter-clockwise).
double side_parameter(Side s, const Point& p) {
  switch (s) {
    case Side::bottom: return p.x;
    case Side::right: return p.y;
    case Side::top: return 1.0 - p.x;
    case Side::left: return 1.0 - p.y;
  }
  return 0.0;
}

}  // namespace

Mesh build_mesh(int n_sub, const PartitionSpec& part, const PatchSpec& patch) {
  if (n_sub < 1) fail(ErrorCode::IncompatibleSubdivision, "n_sub must be >= 1");
  if (n_sub % part.grid_cols != 0 || n_sub % part.grid_rows != 0)
    fail(ErrorCode::IncompatibleSubdivision,
         "n_sub=" + std::to_string(n_sub) + " not divisible by partition " +
             std::to_string(part.grid_cols) + "x" + std::to_string(part.grid_rows));

  Mesh mesh;
  mesh.n_sub = n_sub;
  mesh.partition = part;
  mesh.patch = patch;

  const std::size_t n = static_cast<std::size_t>(n_sub);
  const std::size_t m = n + 1;
  const double h = 1.0 / static_cast<double>(n);
  auto id = [m](std::size_t i, std::size_t j) { return j * m + i; };

  mesh.nodes.reserve(m * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      mesh.nodes.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
  // Exact end coordinates.
  for (std::size_t j = 0; j < m; ++j) mesh.nodes[id(n, j)].x = 1.0;
  for (std::size_t i = 0; i < m; ++i) mesh.nodes[id(i, n)].y = 1.0;

  const std::size_t per_col = n / static_cast<std::size_t>(part.grid_cols);
  const std::size_t per_row = n / static_cast<std::size_t>(part.grid_rows);
  mesh.triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>((j / per_row) * static_cast<std::size_t>(part.grid_cols) +
                                          i / per_col) + 1;
      const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({{a, b, c}, label});
      mesh.triangles.push_back({{a, c, d}, label});
    }
  }

  auto add_edge = [&](std::size_t p, std::size_t q, Side s) {
    const Point mid{0.5 * (mesh.nodes[p].x + mesh.nodes[q].x), 0.5 * (mesh.nodes[p].y + mesh.nodes[q].y)};
    const double t = side_parameter(s, mid);
    const bool on = s == patch.side && t >= patch.t0 && t < patch.t1;
    mesh.boundary_edges.push_back({{p, q}, s, on});
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(id(i, 0), id(i + 1, 0), Side::bottom);
  for (std::size_t j = 0; j < n; ++j) add_edge(id(n, j), id(n, j + 1), Side::right);
  for (std::size_t i = n; i > 0; --i) add_edge(id(i, n), id(i - 1, n), Side::top);
  for (std::size_t j = n; j > 0; --j) add_edge(id(0, j), id(0, j - 1), Side::left);
  return mesh;
}

std::vector<std::size_t> patch_nodes(const Mesh& mesh) {
  std::vector<std::size_t> out;
  for (const auto& e : mesh.boundary_edges) {
    if (!e.on_patch) continue;
    if (out.empty()) out.push_back(e.nodes[0]);
    out.push_back(e.nodes[1]);
  }
  if (out.empty()) fail(ErrorCode::EmptyPatch, "mesh has no patch edges");
  return out;
}

DenseSym boundary_mass_matrix(const Mesh& mesh) {
  const auto nodes = patch_nodes(mesh);
  DenseSym g(nodes.size());
  std::size_t k = 0;
  for (const auto& e : mesh.boundary_edges) {
    if (!e.on_patch) continue;
    const Point& a = mesh.nodes[e.nodes[0]];
    const Point& b = mesh.nodes[e.nodes[1]];
    const double h = std::hypot(b.x - a.x, b.y - a.y);
    g.add(k, k, h / 3.0);
    g.add(k + 1, k + 1, h / 3.0);
    g.add(k, k + 1, h / 6.0);
    ++k;
  }
  return g;
}

Vector patch_hat_integrals(const Mesh& mesh) {
  const DenseSym g = boundary_mass_matrix(mesh);
  Vector s(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) s[i] += g(i, j);
  return s;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  char buf[128];
  out << "# nodes " << mesh.nodes.size() << '\n';
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  out << "# triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles)
    out << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' ' << t.label << '\n';
}

}  // namespace hslab
