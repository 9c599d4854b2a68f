#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "msmfe/material.hpp"
#include "msmfe/mesh.hpp"
#include "msmfe/parallel.hpp"
#include "msmfe/spaces.hpp"

namespace msmfe {

using SpMat = Eigen::SparseMatrix<double>;

/// The seven blocks of the five-field system. The vertex quadrature rule is
/// applied exactly to the mass-type forms (stress_mass, stress_rot,
/// stress_pres, vel_mass and the compliance part of pres_mass); the
/// divergence couplings and source terms use exact integration.
struct BlockSystem {
  SpMat stress_mass;  // (A sigma, tau)_Q                 n_sigma x n_sigma
  SpMat stress_div;   // (div tau, v), exact              n_u x n_sigma
  SpMat stress_rot;   // (sigma, xi)_Q                    n_gamma x n_sigma
  SpMat stress_pres;  // alpha (A sigma, w I)_Q           n_p x n_sigma
  SpMat vel_mass;     // (K^-1 z, zeta)_Q                 n_z x n_z
  SpMat vel_div;      // (div z, w), exact                n_p x n_z
  SpMat pres_mass;    // (c0 p, w) + alpha^2 (A p I, w I)_Q   n_p x n_p (diagonal)
};

struct RhsVectors {
  Eigen::VectorXd b_sigma;  // <g_u, tau n> on the Dirichlet-displacement boundary
  Eigen::VectorXd b_u;      // (f, v)
  Eigen::VectorXd b_gamma;  // zero up to constraint contributions
  Eigen::VectorXd b_z;      // -<g_p, zeta.n> on the Dirichlet-pressure boundary
  Eigen::VectorXd b_p;      // dt (q, w) + time-lag terms added by the stepper
};

struct Constraint {
  int dof;
  double value;
};

/// Essential constraints: normal stress dofs on the traction boundary, normal
/// velocity dofs on the no-flow/flux boundary, plus rotation dofs at vertices
/// whose incident stress dofs are all constrained (such rotations are fully
/// decoupled by the vertex quadrature and are fixed to zero).
struct ConstraintSet {
  std::vector<Constraint> stress;
  std::vector<Constraint> velocity;
  std::vector<int> rotation_fixed;
};

BlockSystem assemble_blocks(const Mesh& mesh, const DofMaps& dofs, const MaterialModel& model,
                            ExecPolicy policy = ExecPolicy::openmp);

/// Source and boundary functionals at time t. The returned b_p equals
/// dt * (q(t), w); the stepper adds the time-lag operator terms.
RhsVectors assemble_rhs(const Mesh& mesh, const DofMaps& dofs, const SourceData& data, double t,
                        double dt);

ConstraintSet essential_constraints(const Mesh& mesh, const DofMaps& dofs, const SourceData& data,
                                    double t);

/// Symmetric-style elimination on a monolithic system: for every constrained
/// dof the column is moved to the right-hand side, the row is zeroed and the
/// diagonal set to one. Throws on conflicting duplicate constraints.
void apply_essential_bc(SpMat& A, Eigen::VectorXd& rhs, const std::vector<Constraint>& constraints);

/// Debug dump in a line-based "row col value" triplet format.
void dump_triplets(const SpMat& A, std::ostream& out);

/// Scans the sparsity pattern of a vertex-grouped matrix and returns true if
/// every nonzero lies inside some vertex group block.
bool sparsity_within_vertex_groups(const SpMat& A, const std::vector<std::vector<int>>& groups);

}  // namespace msmfe
