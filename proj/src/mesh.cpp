#include "xg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace xg {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

// Build edge connectivity from cells; boundary tags via callback on the edge.
void build_edges(Mesh2D& mesh,
                 const std::function<EdgeTag(int, int)>& boundary_tag) {
  std::map<std::pair<int, int>, int> edge_of;
  mesh.cell_edges.assign(mesh.cells.size(), {-1, -1, -1});
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    for (int le = 0; le < 3; ++le) {
      int a = cell[(le + 1) % 3], b = cell[(le + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        EdgeInfo e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.cell_plus = c;
        e.h = (mesh.vertices[a] - mesh.vertices[b]).norm();
        edge_of[key] = mesh.n_edges();
        mesh.cell_edges[c][le] = mesh.n_edges();
        mesh.edges.push_back(e);
      } else {
        EdgeInfo& e = mesh.edges[it->second];
        if (e.cell_minus >= 0)
          throw std::runtime_error("mesh: edge shared by >2 cells");
        // plus = lower cell index
        e.cell_minus = std::max(e.cell_plus, c);
        e.cell_plus = std::min(e.cell_plus, c);
        mesh.cell_edges[c][le] = it->second;
      }
    }
  }
  for (auto& e : mesh.edges) {
    // normal out of the plus cell
    Vec2 a = mesh.vertices[e.v0], b = mesh.vertices[e.v1];
    Vec2 t = (b - a).normalized();
    Vec2 n(t.y(), -t.x());
    const auto& pc = mesh.cells[e.cell_plus];
    Vec2 centroid = (mesh.vertices[pc[0]] + mesh.vertices[pc[1]] +
                     mesh.vertices[pc[2]]) / 3.0;
    if (n.dot(0.5 * (a + b) - centroid) < 0.0) n = -n;
    e.normal = n;
    e.tag = e.is_boundary() ? boundary_tag(e.v0, e.v1) : EdgeTag::Interior;
  }
  mesh.cell_h.resize(mesh.cells.size());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    double h = 0.0;
    for (int i = 0; i < 3; ++i)
      h = std::max(h, (mesh.vertices[cell[i]] -
                       mesh.vertices[cell[(i + 1) % 3]]).norm());
    mesh.cell_h[c] = h;
  }
}

}  // namespace

double Mesh2D::cell_area(int c) const {
  const auto& cl = cells[c];
  return signed_area(vertices[cl[0]], vertices[cl[1]], vertices[cl[2]]);
}

CellGeom Mesh2D::cell_geom(int c) const {
  const auto& cl = cells[c];
  return make_geom(vertices[cl[0]], vertices[cl[1]], vertices[cl[2]]);
}

Vec2 Mesh2D::outward_normal(int c, int le) const {
  const EdgeInfo& e = edges[cell_edges[c][le]];
  return e.cell_plus == c ? e.normal : Vec2(-e.normal);
}

Vec2 Mesh2D::edge_midpoint(int e) const {
  return 0.5 * (vertices[edges[e].v0] + vertices[edges[e].v1]);
}

double Mesh2D::total_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c) a += cell_area(c);
  return a;
}

double Mesh2D::min_angle() const {
  double amin = M_PI;
  for (const auto& cl : cells) {
    for (int i = 0; i < 3; ++i) {
      Vec2 u = vertices[cl[(i + 1) % 3]] - vertices[cl[i]];
      Vec2 v = vertices[cl[(i + 2) % 3]] - vertices[cl[i]];
      amin = std::min(amin, std::acos(u.dot(v) / (u.norm() * v.norm())));
    }
  }
  return amin;
}

Mesh2D build_structured_unit_square(int n) {
  if (n < 1) throw std::invalid_argument("build_structured_unit_square: n < 1");
  Mesh2D mesh;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }
  }
  build_edges(mesh, [](int, int) { return EdgeTag::Dirichlet; });
  validate_mesh(mesh);
  return mesh;
}

Mesh2D build_single_triangle() {
  Mesh2D mesh;
  mesh.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  mesh.cells.push_back({0, 1, 2});
  build_edges(mesh, [](int, int) { return EdgeTag::Dirichlet; });
  validate_mesh(mesh);
  return mesh;
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  Mesh2D fine;
  fine.vertices = mesh.vertices;
  int nv = mesh.n_vertices();
  // midpoint vertex per parent edge
  std::vector<int> mid(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    mid[e] = fine.n_vertices();
    fine.vertices.push_back(mesh.edge_midpoint(e));
  }
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cl = mesh.cells[c];
    int m0 = mid[mesh.cell_edges[c][0]];  // opposite vertex 0 = (v1,v2)
    int m1 = mid[mesh.cell_edges[c][1]];
    int m2 = mid[mesh.cell_edges[c][2]];
    fine.cells.push_back({cl[0], m2, m1});
    fine.cells.push_back({m2, cl[1], m0});
    fine.cells.push_back({m1, m0, cl[2]});
    fine.cells.push_back({m0, m1, m2});
  }
  // a boundary child edge has exactly one midpoint endpoint; its tag comes
  // from the parent edge that midpoint was created on
  std::vector<EdgeTag> mid_tag(fine.n_vertices(), EdgeTag::Interior);
  for (int e = 0; e < mesh.n_edges(); ++e) mid_tag[mid[e]] = mesh.edges[e].tag;
  build_edges(fine, [&](int a, int b) {
    int m = a >= nv ? a : b;
    if (m < nv) throw std::runtime_error("refine: boundary edge without midpoint");
    return mid_tag[m];
  });
  validate_mesh(fine);
  return fine;
}

Mesh2D tag_boundary(const Mesh2D& mesh,
                    const std::function<EdgeTag(const Vec2&)>& predicate) {
  Mesh2D out = mesh;
  bool any_dirichlet = false;
  for (auto& e : out.edges) {
    if (!e.is_boundary()) continue;
    EdgeTag t = predicate(0.5 * (out.vertices[e.v0] + out.vertices[e.v1]));
    if (t == EdgeTag::Interior)
      throw std::invalid_argument("tag_boundary: predicate returned Interior");
    e.tag = t;
    any_dirichlet |= (t == EdgeTag::Dirichlet);
  }
  if (!any_dirichlet)
    throw std::invalid_argument("tag_boundary: no Dirichlet edge left");
  return out;
}

void dump_mesh(const Mesh2D& mesh, std::ostream& os) {
  for (const auto& v : mesh.vertices) os << "v " << v.x() << " " << v.y() << "\n";
  for (const auto& c : mesh.cells)
    os << "c " << c[0] << " " << c[1] << " " << c[2] << "\n";
  for (const auto& e : mesh.edges) {
    const char* tag = e.tag == EdgeTag::Interior    ? "interior"
                      : e.tag == EdgeTag::Dirichlet ? "dirichlet"
                                                    : "neumann";
    os << "e " << e.v0 << " " << e.v1 << " " << tag << "\n";
  }
}

void validate_mesh(const Mesh2D& mesh) {
  bool any_dirichlet = false;
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (mesh.cell_area(c) <= 0.0)
      throw std::runtime_error("mesh: cell not counterclockwise");
  for (const auto& e : mesh.edges) {
    if (std::abs(e.normal.norm() - 1.0) > 1e-14)
      throw std::runtime_error("mesh: non-unit edge normal");
    double d = (mesh.vertices[e.v0] - mesh.vertices[e.v1]).norm();
    if (std::abs(e.h - d) > 1e-14 * (1.0 + d))
      throw std::runtime_error("mesh: edge length mismatch");
    if (e.is_boundary() && e.tag == EdgeTag::Interior)
      throw std::runtime_error("mesh: untagged boundary edge");
    if (!e.is_boundary() && e.tag != EdgeTag::Interior)
      throw std::runtime_error("mesh: tagged interior edge");
    any_dirichlet |= (e.is_boundary() && e.tag == EdgeTag::Dirichlet);
  }
  if (!any_dirichlet) throw std::runtime_error("mesh: no Dirichlet edge");
}

}  // namespace xg
