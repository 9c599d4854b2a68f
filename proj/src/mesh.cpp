#include "msmfe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace msmfe {

namespace {

// Builds edges, cell-edge connectivity, vertex incidence and validates the
// mesh. `tag_by_pair` carries boundary tags keyed by the canonical vertex pair.
void finalize(Mesh& m, const std::map<std::pair<int, int>, std::string>& tag_by_pair) {
  const int s = m.corners();
  m.edges.clear();
  m.cell_edges.assign(m.cells.size(), {-1, -1, -1, -1});
  m.cell_edge_own.assign(m.cells.size(), {0, 0, 0, 0});

  std::map<std::pair<int, int>, int> edge_of;
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int le = 0; le < s; ++le) {
      int a = m.cells[c][le];
      int b = m.cells[c][(le + 1) % s];
      if (a == b) throw std::runtime_error("mesh: degenerate cell edge");
      auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.cell_lo = c;
        e.lo_local_edge = le;
        edge_of.emplace(key, static_cast<int>(m.edges.size()));
        m.cell_edges[c][le] = static_cast<int>(m.edges.size());
        m.edges.push_back(e);
      } else {
        Edge& e = m.edges[it->second];
        if (e.cell_hi >= 0) throw std::runtime_error("mesh: edge shared by more than two cells");
        e.cell_hi = c;
        m.cell_edges[c][le] = it->second;
      }
    }
  }

  // Owner of an edge is the lower cell id; with cells discovered in order,
  // cell_lo is already the smaller id.
  for (int c = 0; c < m.n_cells(); ++c)
    for (int le = 0; le < s; ++le) {
      int e = m.cell_edges[c][le];
      m.cell_edge_own[c][le] = (m.edges[e].cell_lo == c) ? 1 : 0;
    }

  m.edge_tag.assign(m.edges.size(), std::string());
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edges[e].boundary()) continue;
    auto it = tag_by_pair.find({m.edges[e].v0, m.edges[e].v1});
    if (it != tag_by_pair.end()) m.edge_tag[e] = it->second;
  }
  for (const auto& [pair, tag] : tag_by_pair) {
    auto it = edge_of.find(pair);
    if (it == edge_of.end()) throw std::runtime_error("mesh: tagged edge not found: " + tag);
    if (!m.edges[it->second].boundary())
      throw std::runtime_error("mesh: interior edge carries boundary tag: " + tag);
  }

  m.vertex_edges.assign(m.nodes.size(), {});
  m.vertex_cells.assign(m.nodes.size(), {});
  for (int e = 0; e < m.n_edges(); ++e) {
    m.vertex_edges[m.edges[e].v0].push_back(e);
    m.vertex_edges[m.edges[e].v1].push_back(e);
  }
  for (int c = 0; c < m.n_cells(); ++c)
    for (int i = 0; i < s; ++i) m.vertex_cells[m.cells[c][i]].push_back(c);

  // Positive Jacobian at all reference vertices of every cell.
  for (int c = 0; c < m.n_cells(); ++c) element_map(m, c);
}

Eigen::Vector2d outward_normal(const Mesh& m, int cell, int local_edge) {
  const int s = m.corners();
  Eigen::Vector2d a = m.nodes[m.cells[cell][local_edge]];
  Eigen::Vector2d b = m.nodes[m.cells[cell][(local_edge + 1) % s]];
  Eigen::Vector2d t = b - a;
  // CCW polygon: outward normal is the tangent rotated clockwise.
  return Eigen::Vector2d(t.y(), -t.x()).normalized();
}

}  // namespace

Eigen::Vector2d Mesh::edge_normal(int e) const {
  return outward_normal(*this, edges[e].cell_lo, edges[e].lo_local_edge);
}

double Mesh::cell_diameter(int c) const {
  const int s = corners();
  double d = 0;
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j)
      d = std::max(d, (nodes[cells[c][i]] - nodes[cells[c][j]]).norm());
  return d;
}

double Mesh::max_diameter() const {
  double d = 0;
  for (int c = 0; c < n_cells(); ++c) d = std::max(d, cell_diameter(c));
  return d;
}

double Mesh::parallelogram_defect(int c) const {
  if (cell_type != CellType::quadrilateral)
    throw std::invalid_argument("parallelogram_defect: quadrilateral meshes only");
  Eigen::Vector2d r1 = nodes[cells[c][0]], r2 = nodes[cells[c][1]];
  Eigen::Vector2d r3 = nodes[cells[c][2]], r4 = nodes[cells[c][3]];
  return ((r3 - r4) - (r2 - r1)).norm();
}

Eigen::Vector2d ElementMap::map(const Eigen::Vector2d& xh) const {
  if (type == CellType::triangle)
    return corner[0] + (corner[1] - corner[0]) * xh.x() + (corner[2] - corner[0]) * xh.y();
  const double x = xh.x(), y = xh.y();
  return corner[0] * ((1 - x) * (1 - y)) + corner[1] * (x * (1 - y)) + corner[2] * (x * y) +
         corner[3] * ((1 - x) * y);
}

Eigen::Matrix2d ElementMap::jacobian(const Eigen::Vector2d& xh) const {
  Eigen::Matrix2d J;
  if (type == CellType::triangle) {
    J.col(0) = corner[1] - corner[0];
    J.col(1) = corner[2] - corner[0];
    return J;
  }
  const double x = xh.x(), y = xh.y();
  J.col(0) = (corner[1] - corner[0]) * (1 - y) + (corner[2] - corner[3]) * y;
  J.col(1) = (corner[3] - corner[0]) * (1 - x) + (corner[2] - corner[1]) * x;
  return J;
}

double ElementMap::jac_det(const Eigen::Vector2d& xh) const { return jacobian(xh).determinant(); }

double ElementMap::area() const {
  if (type == CellType::triangle) return 0.5 * jac_det({0, 0});
  // J is affine in the reference coordinates, so the midpoint value is exact.
  return jac_det({0.5, 0.5});
}

Mesh build_rectangle_mesh(const Rect& r, int nx, int ny, CellType cell_type) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_rectangle_mesh: nx, ny must be >= 1");
  if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
    throw std::invalid_argument("build_rectangle_mesh: degenerate rectangle");

  Mesh m;
  m.cell_type = cell_type;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.emplace_back(r.x0 + (r.x1 - r.x0) * i / nx, r.y0 + (r.y1 - r.y0) * j / ny);

  std::map<std::pair<int, int>, std::string> tags;
  auto tag = [&](int a, int b, const char* t) { tags[std::minmax(a, b)] = t; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      if (cell_type == CellType::quadrilateral) {
        m.cells.push_back({v00, v10, v11, v01});
      } else {
        // fixed split along the bottom-left -> top-right diagonal
        m.cells.push_back({v00, v10, v11, -1});
        m.cells.push_back({v00, v11, v01, -1});
      }
      if (j == 0) tag(v00, v10, "bottom");
      if (j == ny - 1) tag(v01, v11, "top");
      if (i == 0) tag(v00, v01, "left");
      if (i == nx - 1) tag(v10, v11, "right");
    }
  finalize(m, tags);
  return m;
}

Mesh distort_example2(const Mesh& mesh) {
  Mesh m = mesh;
  for (auto& p : m.nodes) {
    const double x = p.x(), y = p.y();
    if (x < -1e-12 || x > 1 + 1e-12 || y < -1e-12 || y > 1 + 1e-12)
      throw std::invalid_argument("distort_example2: nodes must lie in the unit square");
    const double c = std::cos(3 * M_PI * x) * std::cos(3 * M_PI * y);
    p.x() = x + 0.03 * c;
    p.y() = y - 0.04 * c;
  }
  std::map<std::pair<int, int>, std::string> tags;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (!mesh.edge_tag[e].empty()) tags[{mesh.edges[e].v0, mesh.edges[e].v1}] = mesh.edge_tag[e];
  finalize(m, tags);
  return m;
}

Mesh refine_uniform(const Mesh& mesh) {
  const int s = mesh.corners();
  Mesh m;
  m.cell_type = mesh.cell_type;
  m.nodes = mesh.nodes;

  // midpoint node per edge
  std::vector<int> edge_mid(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    edge_mid[e] = m.n_nodes();
    m.nodes.push_back(mesh.edge_midpoint(e));
  }
  // physical center node per quad cell (bilinear midpoint = corner average)
  std::vector<int> cell_center(mesh.n_cells(), -1);
  if (mesh.cell_type == CellType::quadrilateral)
    for (int c = 0; c < mesh.n_cells(); ++c) {
      cell_center[c] = m.n_nodes();
      Eigen::Vector2d ctr = 0.25 * (mesh.nodes[mesh.cells[c][0]] + mesh.nodes[mesh.cells[c][1]] +
                                    mesh.nodes[mesh.cells[c][2]] + mesh.nodes[mesh.cells[c][3]]);
      m.nodes.push_back(ctr);
    }

  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::array<int, 4> v = mesh.cells[c];
    std::array<int, 4> me;
    for (int le = 0; le < s; ++le) me[le] = edge_mid[mesh.cell_edges[c][le]];
    if (mesh.cell_type == CellType::quadrilateral) {
      int ctr = cell_center[c];
      m.cells.push_back({v[0], me[0], ctr, me[3]});
      m.cells.push_back({me[0], v[1], me[1], ctr});
      m.cells.push_back({ctr, me[1], v[2], me[2]});
      m.cells.push_back({me[3], ctr, me[2], v[3]});
    } else {
      m.cells.push_back({v[0], me[0], me[2], -1});
      m.cells.push_back({me[0], v[1], me[1], -1});
      m.cells.push_back({me[2], me[1], v[2], -1});
      m.cells.push_back({me[0], me[1], me[2], -1});
    }
  }

  std::map<std::pair<int, int>, std::string> tags;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_tag[e].empty()) continue;
    int mid = edge_mid[e];
    tags[std::minmax(mesh.edges[e].v0, mid)] = mesh.edge_tag[e];
    tags[std::minmax(mesh.edges[e].v1, mid)] = mesh.edge_tag[e];
  }
  finalize(m, tags);
  return m;
}

ElementMap element_map(const Mesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.n_cells()) throw std::invalid_argument("element_map: bad cell id");
  ElementMap em;
  em.type = mesh.cell_type;
  const int s = mesh.corners();
  for (int i = 0; i < s; ++i) em.corner[i] = mesh.nodes[mesh.cells[cell][i]];
  static const Eigen::Vector2d ref[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int i = 0; i < s; ++i)
    if (!(em.jac_det(ref[i]) > 0))
      throw std::runtime_error("element_map: inverted cell " + std::to_string(cell));
  return em;
}

Eigen::Vector2d piola_vector(const ElementMap& map, const Eigen::Vector2d& vhat,
                             const Eigen::Vector2d& xhat) {
  return map.jacobian(xhat) * vhat / map.jac_det(xhat);
}

Eigen::Matrix2d piola_tensor(const ElementMap& map, const Eigen::Matrix2d& that,
                             const Eigen::Vector2d& xhat) {
  Eigen::Matrix2d DF = map.jacobian(xhat);
  double J = map.jac_det(xhat);
  Eigen::Matrix2d out;
  out.row(0) = (DF * that.row(0).transpose()).transpose() / J;
  out.row(1) = (DF * that.row(1).transpose()).transpose() / J;
  return out;
}

Mesh retag_boundary(const Mesh& mesh,
                    const std::function<std::string(const Eigen::Vector2d&, const std::string&)>& fn) {
  Mesh m = mesh;
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edges[e].boundary()) m.edge_tag[e] = fn(m.edge_midpoint(e), mesh.edge_tag[e]);
  return m;
}

namespace {

// Stream tokenizer that drops '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw std::runtime_error("mesh file: unexpected end of input");
}

int next_int(std::istream& in) { return std::stoi(next_token(in)); }
double next_double(std::istream& in) { return std::stod(next_token(in)); }

}  // namespace

Mesh read_mesh(std::istream& in) {
  if (next_token(in) != "msmfe-mesh") throw std::runtime_error("mesh file: bad magic");
  if (next_int(in) != 1) throw std::runtime_error("mesh file: unsupported version");
  std::string kind = next_token(in);
  Mesh m;
  if (kind == "tri")
    m.cell_type = CellType::triangle;
  else if (kind == "quad")
    m.cell_type = CellType::quadrilateral;
  else
    throw std::runtime_error("mesh file: cell kind must be tri or quad");

  int nn = next_int(in), nc = next_int(in);
  if (nn < 3 || nc < 1) throw std::runtime_error("mesh file: bad node/cell counts");
  m.nodes.resize(nn);
  for (auto& p : m.nodes) {
    p.x() = next_double(in);
    p.y() = next_double(in);
  }
  const int s = m.corners();
  m.cells.assign(nc, {-1, -1, -1, -1});
  for (auto& c : m.cells)
    for (int i = 0; i < s; ++i) {
      c[i] = next_int(in);
      if (c[i] < 0 || c[i] >= nn) throw std::runtime_error("mesh file: node id out of range");
    }
  int nt = next_int(in);
  std::map<std::pair<int, int>, std::string> tags;
  for (int i = 0; i < nt; ++i) {
    int a = next_int(in), b = next_int(in);
    tags[std::minmax(a, b)] = next_token(in);
  }
  finalize(m, tags);
  return m;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  char buf[80];
  out << "msmfe-mesh 1 " << (mesh.cell_type == CellType::triangle ? "tri" : "quad") << "\n";
  out << mesh.n_nodes() << " " << mesh.n_cells() << "\n";
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
    out << buf;
  }
  const int s = mesh.corners();
  for (const auto& c : mesh.cells) {
    for (int i = 0; i < s; ++i) out << c[i] << (i + 1 < s ? ' ' : '\n');
  }
  int nt = 0;
  for (const auto& t : mesh.edge_tag)
    if (!t.empty()) ++nt;
  out << nt << "\n";
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (!mesh.edge_tag[e].empty())
      out << mesh.edges[e].v0 << " " << mesh.edges[e].v1 << " " << mesh.edge_tag[e] << "\n";
}

}  // namespace msmfe
