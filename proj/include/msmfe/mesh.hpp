#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace msmfe {

enum class CellType { triangle, quadrilateral };

inline int corners_of(CellType t) { return t == CellType::triangle ? 3 : 4; }

/// Area of the reference element (unit right triangle or unit square).
inline double reference_area(CellType t) { return t == CellType::triangle ? 0.5 : 1.0; }

struct Rect {
  double x0, y0, x1, y1;
};

/// Mesh edge. Vertices are stored with v0 < v1. The global edge normal points
/// from cell_lo into cell_hi, i.e. it is the outward normal of cell_lo on this
/// edge; boundary edges have cell_hi = -1 and an outward-pointing normal.
struct Edge {
  int v0 = -1, v1 = -1;
  int cell_lo = -1, cell_hi = -1;
  int lo_local_edge = -1;  // local edge index of this edge within cell_lo
  bool boundary() const { return cell_hi < 0; }
};

/// Conforming 2D mesh of triangles or quadrilaterals with counterclockwise
/// cell vertex ordering. Immutable once built; construction validates
/// conformity and positive Jacobians at the reference vertices.
struct Mesh {
  CellType cell_type = CellType::quadrilateral;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> cells;  // entry [3] is -1 for triangles
  std::vector<Edge> edges;
  std::vector<std::string> edge_tag;              // empty for interior edges
  std::vector<std::array<int, 4>> cell_edges;     // local edge -> global edge id
  std::vector<std::array<int, 4>> cell_edge_own;  // 1 if cell is the edge owner (cell_lo)
  std::vector<std::vector<int>> vertex_edges;     // ascending incident edge ids
  std::vector<std::vector<int>> vertex_cells;     // ascending incident cell ids

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int corners() const { return corners_of(cell_type); }

  Eigen::Vector2d node(int v) const { return nodes[v]; }
  int cell_vertex(int c, int local) const { return cells[c][local]; }

  /// Straight-line length of an edge.
  double edge_length(int e) const { return (nodes[edges[e].v1] - nodes[edges[e].v0]).norm(); }

  /// Midpoint of an edge.
  Eigen::Vector2d edge_midpoint(int e) const {
    return 0.5 * (nodes[edges[e].v0] + nodes[edges[e].v1]);
  }

  /// Unit normal of the global orientation (outward from cell_lo).
  Eigen::Vector2d edge_normal(int e) const;

  /// Max distance between any two vertices of a cell.
  double cell_diameter(int c) const;
  double max_diameter() const;

  /// ||r34 - r21|| for a quadrilateral cell (zero iff the cell is a parallelogram).
  double parallelogram_defect(int c) const;
};

/// Reference-to-physical map of one cell: affine for triangles, bilinear for
/// quadrilaterals (Jacobian affine in the reference coordinates).
struct ElementMap {
  CellType type;
  std::array<Eigen::Vector2d, 4> corner;  // physical corner coordinates

  Eigen::Vector2d map(const Eigen::Vector2d& xhat) const;
  Eigen::Matrix2d jacobian(const Eigen::Vector2d& xhat) const;
  double jac_det(const Eigen::Vector2d& xhat) const;
  /// Exact cell area, computed from the (affine) Jacobian determinant.
  double area() const;
};

/// Structured mesh of an axis-aligned rectangle; triangle mode splits every
/// quad along the bottom-left -> top-right diagonal. Boundary edges are tagged
/// "left", "right", "bottom", "top".
Mesh build_rectangle_mesh(const Rect& domain, int nx, int ny, CellType cell_type);

/// Node relocation used by the distorted-square convergence study:
/// (x, y) = (x + 0.03 cos(3 pi x) cos(3 pi y), y - 0.04 cos(3 pi x) cos(3 pi y)).
/// Nodes must lie in the unit square; connectivity is unchanged.
Mesh distort_example2(const Mesh& mesh);

/// Uniform refinement by physical edge/center midpoints; each cell splits
/// into four, boundary tags are inherited.
Mesh refine_uniform(const Mesh& mesh);

/// Element map accessor; throws on an inverted (non-positive Jacobian) cell.
ElementMap element_map(const Mesh& mesh, int cell);

/// Piola transform of a reference vector value at reference point xhat:
/// (1/J) DF vhat. Tensors transform row-wise via piola_tensor.
Eigen::Vector2d piola_vector(const ElementMap& map, const Eigen::Vector2d& vhat,
                             const Eigen::Vector2d& xhat);
Eigen::Matrix2d piola_tensor(const ElementMap& map, const Eigen::Matrix2d& that,
                             const Eigen::Vector2d& xhat);

/// Replace boundary tags cell by cell: fn(midpoint, old_tag) -> new_tag.
Mesh retag_boundary(const Mesh& mesh,
                    const std::function<std::string(const Eigen::Vector2d&, const std::string&)>& fn);

/// ASCII mesh format:
///   msmfe-mesh 1 <tri|quad>
///   <n_nodes> <n_cells>
///   x y                       (n_nodes lines)
///   v0 v1 v2 [v3]             (n_cells lines, zero-based)
///   <n_tagged_edges>
///   v0 v1 tag                 (n_tagged_edges lines)
/// '#' starts a comment anywhere.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace msmfe
