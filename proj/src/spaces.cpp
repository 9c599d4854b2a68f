#include "msmfe/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include "msmfe/quadrature.hpp"

namespace msmfe {

namespace {

const Eigen::Vector2d kTriNormal[3] = {{0, -1}, {M_SQRT1_2, M_SQRT1_2}, {-1, 0}};
const Eigen::Vector2d kQuadNormal[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
const double kTriRefEdgeLen[3] = {1.0, M_SQRT2, 1.0};

// Triangle BDM1 = P1^2: value at the own corner solving the two normal
// conditions there, times the corner's barycentric hat.
struct TriBasis {
  Eigen::Vector2d corner_value[6];
  int corner_of[6];
  double div[6];
  TriBasis() {
    const Eigen::Vector2d grad[3] = {{-1, -1}, {1, 0}, {0, 1}};
    for (int le = 0; le < 3; ++le)
      for (int ep = 0; ep < 2; ++ep) {
        int j = 2 * le + ep;
        int k = (le + ep) % 3;
        int other = (le == k) ? (k + 2) % 3 : k;
        Eigen::Matrix2d N;
        N.row(0) = kTriNormal[le];
        N.row(1) = kTriNormal[other];
        corner_value[j] = N.colPivHouseholderQr().solve(Eigen::Vector2d(1, 0));
        corner_of[j] = k;
        div[j] = corner_value[j].dot(grad[k]);
      }
  }
};

// Quadrilateral BDM1: P1^2 enriched with curl(x^2 y) and curl(x y^2).
// A member is determined by its corner values:
//   v1 = a1 x + b1 y + c1 + r x^2 + 2 s x y
//   v2 = a2 x + b2 y + c2 - 2 r x y - s y^2
struct QuadCoef {
  double a1, b1, c1, a2, b2, c2, r, s;
};

QuadCoef quad_from_corners(const Eigen::Vector2d V[4]) {
  QuadCoef q;
  q.c1 = V[0].x();
  q.b1 = V[3].x() - V[0].x();
  q.c2 = V[0].y();
  q.a2 = V[1].y() - V[0].y();
  q.s = 0.5 * (V[2].x() - V[3].x() - V[1].x() + V[0].x());
  q.r = 0.5 * (V[1].y() + V[3].y() - V[0].y() - V[2].y());
  q.a1 = V[1].x() - q.c1 - q.r;
  q.b2 = V[3].y() - q.c2 + q.s;
  return q;
}

struct QuadBasis {
  QuadCoef coef[8];
  double div[8];
  QuadBasis() {
    for (int le = 0; le < 4; ++le)
      for (int ep = 0; ep < 2; ++ep) {
        int j = 2 * le + ep;
        Eigen::Vector2d V[4] = {{0, 0}, {0, 0}, {0, 0}, {0, 0}};
        V[(le + ep) % 4] = kQuadNormal[le];
        coef[j] = quad_from_corners(V);
        div[j] = coef[j].a1 + coef[j].b2;
      }
  }
};

const TriBasis& tri_basis() {
  static const TriBasis b;
  return b;
}
const QuadBasis& quad_basis() {
  static const QuadBasis b;
  return b;
}

double tri_bary(int corner, const Eigen::Vector2d& x) {
  switch (corner) {
    case 0: return 1.0 - x.x() - x.y();
    case 1: return x.x();
    default: return x.y();
  }
}

double quad_q1(int corner, const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  switch (corner) {
    case 0: return (1 - x) * (1 - y);
    case 1: return x * (1 - y);
    case 2: return x * y;
    default: return (1 - x) * y;
  }
}

}  // namespace

Eigen::Vector2d bdm1_value(CellType cell, int j, const Eigen::Vector2d& xhat) {
  if (cell == CellType::triangle) {
    const TriBasis& b = tri_basis();
    return b.corner_value[j] * tri_bary(b.corner_of[j], xhat);
  }
  const QuadCoef& q = quad_basis().coef[j];
  const double x = xhat.x(), y = xhat.y();
  return {q.a1 * x + q.b1 * y + q.c1 + q.r * x * x + 2 * q.s * x * y,
          q.a2 * x + q.b2 * y + q.c2 - 2 * q.r * x * y - q.s * y * y};
}

double bdm1_div(CellType cell, int j) {
  return cell == CellType::triangle ? tri_basis().div[j] : quad_basis().div[j];
}

double rotation_value(CellType cell, int corner, const Eigen::Vector2d& xhat) {
  return cell == CellType::triangle ? tri_bary(corner, xhat) : quad_q1(corner, xhat);
}

int local_dof_count(CellType cell, SpaceKind space) {
  const int s = corners_of(cell);
  switch (space) {
    case SpaceKind::stress_bdm1: return 4 * s;
    case SpaceKind::velocity_bdm1: return 2 * s;
    case SpaceKind::displacement_p0: return 2;
    case SpaceKind::pressure_p0: return 1;
    case SpaceKind::rotation_p1: return s;
  }
  return 0;
}

DofMap build_dofmap(const Mesh& mesh, SpaceKind space) {
  DofMap dm;
  dm.space = space;
  const int s = mesh.corners();
  const int nc = mesh.n_cells();

  auto cellwise = [&](int per_cell) {
    dm.n_dofs = per_cell * nc;
    dm.cell_dofs.resize(nc);
    dm.cell_coef.resize(nc);
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < per_cell; ++i) {
        dm.cell_dofs[c].push_back(per_cell * c + i);
        dm.cell_coef[c].push_back(1.0);
      }
  };

  switch (space) {
    case SpaceKind::displacement_p0: cellwise(2); return dm;
    case SpaceKind::pressure_p0: cellwise(1); return dm;
    case SpaceKind::rotation_p1: {
      dm.n_dofs = mesh.n_nodes();
      dm.cell_dofs.resize(nc);
      dm.cell_coef.resize(nc);
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < s; ++i) {
          dm.cell_dofs[c].push_back(mesh.cells[c][i]);
          dm.cell_coef[c].push_back(1.0);
        }
      dm.vertex_groups.resize(mesh.n_nodes());
      for (int v = 0; v < mesh.n_nodes(); ++v) dm.vertex_groups[v] = {v};
      return dm;
    }
    default: break;
  }

  // H(div) spaces: dofs per edge, endpoint slots ordered by global vertex id.
  const bool stress = (space == SpaceKind::stress_bdm1);
  const int per_edge = stress ? 4 : 2;
  dm.n_dofs = per_edge * mesh.n_edges();
  dm.cell_dofs.resize(nc);
  dm.cell_coef.resize(nc);
  for (int c = 0; c < nc; ++c) {
    for (int le = 0; le < s; ++le) {
      const int e = mesh.cell_edges[c][le];
      const double sign = mesh.cell_edge_own[c][le] ? 1.0 : -1.0;
      const double ref_len =
          mesh.cell_type == CellType::triangle ? kTriRefEdgeLen[le] : 1.0;
      const double scale = mesh.edge_length(e) / ref_len;
      for (int ep = 0; ep < 2; ++ep) {
        const int corner_vertex = mesh.cells[c][(le + ep) % s];
        const int slot = (corner_vertex == mesh.edges[e].v0) ? 0 : 1;
        if (stress) {
          for (int row = 0; row < 2; ++row) {
            dm.cell_dofs[c].push_back(4 * e + 2 * slot + row);
            dm.cell_coef[c].push_back(sign * scale);
          }
        } else {
          dm.cell_dofs[c].push_back(2 * e + slot);
          dm.cell_coef[c].push_back(sign * scale);
        }
      }
    }
  }
  dm.vertex_groups.resize(mesh.n_nodes());
  for (int v = 0; v < mesh.n_nodes(); ++v)
    for (int e : mesh.vertex_edges[v]) {
      const int slot = (v == mesh.edges[e].v0) ? 0 : 1;
      if (stress) {
        dm.vertex_groups[v].push_back(4 * e + 2 * slot + 0);
        dm.vertex_groups[v].push_back(4 * e + 2 * slot + 1);
      } else {
        dm.vertex_groups[v].push_back(2 * e + slot);
      }
    }
  return dm;
}

DofMaps build_dofmaps(const Mesh& mesh) {
  return {build_dofmap(mesh, SpaceKind::stress_bdm1), build_dofmap(mesh, SpaceKind::velocity_bdm1),
          build_dofmap(mesh, SpaceKind::displacement_p0), build_dofmap(mesh, SpaceKind::pressure_p0),
          build_dofmap(mesh, SpaceKind::rotation_p1)};
}

namespace {

// Mean of a scalar function over a straight edge via 5-point Gauss.
double edge_mean(const Mesh& mesh, int edge, const std::function<double(const Eigen::Vector2d&)>& f) {
  std::vector<double> x, w;
  gauss_legendre_01(5, x, w);
  const Eigen::Vector2d a = mesh.nodes[mesh.edges[edge].v0];
  const Eigen::Vector2d b = mesh.nodes[mesh.edges[edge].v1];
  double m = 0;
  for (size_t i = 0; i < x.size(); ++i) m += w[i] * f(a + x[i] * (b - a));
  return m;
}

}  // namespace

std::array<double, 2> interpolate_boundary_normal(const Mesh& mesh, int edge,
                                                  const std::function<double(const Eigen::Vector2d&)>& gn,
                                                  BoundaryMode mode) {
  if (!mesh.edges[edge].boundary())
    throw std::invalid_argument("interpolate_boundary_normal: interior edge");
  if (mode == BoundaryMode::pointwise)
    return {gn(mesh.nodes[mesh.edges[edge].v0]), gn(mesh.nodes[mesh.edges[edge].v1])};
  const double m = edge_mean(mesh, edge, gn);
  return {m, m};
}

std::array<double, 4> interpolate_boundary_traction(const Mesh& mesh, int edge,
                                                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& g,
                                                    BoundaryMode mode) {
  if (!mesh.edges[edge].boundary())
    throw std::invalid_argument("interpolate_boundary_traction: interior edge");
  std::array<double, 4> out;
  if (mode == BoundaryMode::pointwise) {
    Eigen::Vector2d g0 = g(mesh.nodes[mesh.edges[edge].v0]);
    Eigen::Vector2d g1 = g(mesh.nodes[mesh.edges[edge].v1]);
    out = {g0.x(), g0.y(), g1.x(), g1.y()};
  } else {
    for (int row = 0; row < 2; ++row) {
      const double m = edge_mean(mesh, edge, [&](const Eigen::Vector2d& x) { return g(x)[row]; });
      out[row] = out[2 + row] = m;
    }
  }
  return out;
}

Eigen::Matrix2d FieldEvaluator::stress(const Eigen::VectorXd& coef, int cell,
                                       const Eigen::Vector2d& xhat) const {
  ElementMap em = element_map(*mesh, cell);
  const Eigen::Matrix2d DF = em.jacobian(xhat);
  const double J = em.jac_det(xhat);
  const int s = mesh->corners();
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  const auto& dofs = this->dofs->stress.cell_dofs[cell];
  const auto& mult = this->dofs->stress.cell_coef[cell];
  for (int jv = 0; jv < 2 * s; ++jv) {
    Eigen::Vector2d val = DF * bdm1_value(mesh->cell_type, jv, xhat) / J;
    for (int row = 0; row < 2; ++row) {
      const int loc = 2 * jv + row;
      out.row(row) += coef[dofs[loc]] * mult[loc] * val.transpose();
    }
  }
  return out;
}

Eigen::Vector2d FieldEvaluator::stress_div(const Eigen::VectorXd& coef, int cell,
                                           const Eigen::Vector2d& xhat) const {
  ElementMap em = element_map(*mesh, cell);
  const double J = em.jac_det(xhat);
  const int s = mesh->corners();
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  const auto& dofs = this->dofs->stress.cell_dofs[cell];
  const auto& mult = this->dofs->stress.cell_coef[cell];
  for (int jv = 0; jv < 2 * s; ++jv) {
    const double d = bdm1_div(mesh->cell_type, jv) / J;
    for (int row = 0; row < 2; ++row) {
      const int loc = 2 * jv + row;
      out[row] += coef[dofs[loc]] * mult[loc] * d;
    }
  }
  return out;
}

Eigen::Vector2d FieldEvaluator::velocity(const Eigen::VectorXd& coef, int cell,
                                         const Eigen::Vector2d& xhat) const {
  ElementMap em = element_map(*mesh, cell);
  const Eigen::Matrix2d DF = em.jacobian(xhat);
  const double J = em.jac_det(xhat);
  const int s = mesh->corners();
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  const auto& dofs = this->dofs->velocity.cell_dofs[cell];
  const auto& mult = this->dofs->velocity.cell_coef[cell];
  for (int j = 0; j < 2 * s; ++j)
    out += coef[dofs[j]] * mult[j] * (DF * bdm1_value(mesh->cell_type, j, xhat) / J);
  return out;
}

double FieldEvaluator::velocity_div(const Eigen::VectorXd& coef, int cell,
                                    const Eigen::Vector2d& xhat) const {
  ElementMap em = element_map(*mesh, cell);
  const double J = em.jac_det(xhat);
  const int s = mesh->corners();
  double out = 0;
  const auto& dofs = this->dofs->velocity.cell_dofs[cell];
  const auto& mult = this->dofs->velocity.cell_coef[cell];
  for (int j = 0; j < 2 * s; ++j)
    out += coef[dofs[j]] * mult[j] * bdm1_div(mesh->cell_type, j) / J;
  return out;
}

Eigen::Vector2d FieldEvaluator::displacement(const Eigen::VectorXd& coef, int cell) const {
  return {coef[2 * cell], coef[2 * cell + 1]};
}

double FieldEvaluator::pressure(const Eigen::VectorXd& coef, int cell) const { return coef[cell]; }

double FieldEvaluator::rotation(const Eigen::VectorXd& coef, int cell,
                                const Eigen::Vector2d& xhat) const {
  const int s = mesh->corners();
  double out = 0;
  for (int i = 0; i < s; ++i)
    out += coef[mesh->cells[cell][i]] * rotation_value(mesh->cell_type, i, xhat);
  return out;
}

}  // namespace msmfe
