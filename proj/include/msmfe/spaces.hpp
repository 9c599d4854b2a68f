#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "msmfe/mesh.hpp"

namespace msmfe {

/// Discrete spaces of the five-field formulation. The H(div) spaces carry
/// their degrees of freedom as normal-component values at the two endpoints
/// of each edge; rotation is the scalar r of the skew matrix [[0, r], [-r, 0]]
/// stored at mesh vertices.
enum class SpaceKind {
  stress_bdm1,      // tensor, 4 DOFs per edge (2 endpoints x 2 rows)
  velocity_bdm1,    // vector, 2 DOFs per edge
  displacement_p0,  // 2 DOFs per cell
  pressure_p0,      // 1 DOF per cell
  rotation_p1,      // 1 DOF per vertex (P1 on triangles, Q1 on quadrilaterals)
};

/// Reference nodal basis of the vector BDM1 space. Basis index j = 2*le + ep
/// where le is the local edge and ep picks the first/second corner along the
/// counterclockwise edge. Each function has unit outward-normal component at
/// its own (edge, corner) node and zero at every other node; its full vector
/// value vanishes at all non-own corners.
Eigen::Vector2d bdm1_value(CellType cell, int j, const Eigen::Vector2d& xhat);

/// Divergence of a reference BDM1 basis function (constant on the element).
double bdm1_div(CellType cell, int j);

/// Nodal scalar basis of the rotation space (P1 barycentric / Q1 bilinear).
double rotation_value(CellType cell, int corner, const Eigen::Vector2d& xhat);

struct DofMap {
  SpaceKind space;
  int n_dofs = 0;
  /// Per cell, indexed by the reference-local dof: global dof id and the
  /// multiplier (orientation sign x edge-length normalization) that makes the
  /// mapped reference basis have unit physical normal value at its node with
  /// respect to the global edge normal.
  std::vector<std::vector<int>> cell_dofs;
  std::vector<std::vector<double>> cell_coef;
  /// For vertex-grouped spaces: ordered global dofs living at each vertex
  /// (size k for velocity, 2k for stress, 1 for rotation at a vertex with k
  /// incident edges).
  std::vector<std::vector<int>> vertex_groups;
};

DofMap build_dofmap(const Mesh& mesh, SpaceKind space);

struct DofMaps {
  DofMap stress, velocity, displacement, pressure, rotation;
};
DofMaps build_dofmaps(const Mesh& mesh);

/// Local dof count per cell for a space.
int local_dof_count(CellType cell, SpaceKind space);

/// Boundary-data reduction for the normal DOFs of one boundary edge.
/// pointwise evaluates g.n at the two endpoints; edge_average assigns the
/// edge mean of g.n to both. Values are with respect to the outward normal.
enum class BoundaryMode { pointwise, edge_average };

/// Velocity flavor: g is the prescribed normal flux value z.n (scalar field).
std::array<double, 2> interpolate_boundary_normal(const Mesh& mesh, int edge,
                                                  const std::function<double(const Eigen::Vector2d&)>& gn,
                                                  BoundaryMode mode);

/// Stress flavor: g is the traction vector sigma.n; returns values ordered
/// (slot0 row0, slot0 row1, slot1 row0, slot1 row1).
std::array<double, 4> interpolate_boundary_traction(const Mesh& mesh, int edge,
                                                    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& g,
                                                    BoundaryMode mode);

/// Point evaluation of discrete fields from global coefficient vectors.
struct FieldEvaluator {
  const Mesh* mesh;
  const DofMaps* dofs;

  Eigen::Matrix2d stress(const Eigen::VectorXd& coef, int cell, const Eigen::Vector2d& xhat) const;
  Eigen::Vector2d stress_div(const Eigen::VectorXd& coef, int cell, const Eigen::Vector2d& xhat) const;
  Eigen::Vector2d velocity(const Eigen::VectorXd& coef, int cell, const Eigen::Vector2d& xhat) const;
  double velocity_div(const Eigen::VectorXd& coef, int cell, const Eigen::Vector2d& xhat) const;
  Eigen::Vector2d displacement(const Eigen::VectorXd& coef, int cell) const;
  double pressure(const Eigen::VectorXd& coef, int cell) const;
  double rotation(const Eigen::VectorXd& coef, int cell, const Eigen::Vector2d& xhat) const;
};

}  // namespace msmfe
