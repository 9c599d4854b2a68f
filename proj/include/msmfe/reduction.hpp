#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "msmfe/assembly.hpp"

namespace msmfe {

/// Dense data of one mesh vertex used by the local elimination: the
/// (constraint-reduced) stress and velocity mass blocks, the rotation row,
/// and the couplings into the displacement and pressure unknowns of the
/// adjacent cells.
struct LocalVertexSystem {
  int vertex = -1;
  int k = 0;                       // free velocity dofs at the vertex (reduced valence)
  std::vector<int> stress_dofs;    // free stress dofs (global ids), size 2k typically
  std::vector<int> velocity_dofs;  // free velocity dofs (global ids)
  Eigen::MatrixXd S;               // stress mass block
  Eigen::MatrixXd Z;               // velocity mass block
  Eigen::LDLT<Eigen::MatrixXd> S_fac, Z_fac;
  Eigen::RowVectorXd G;            // rotation row against the vertex stress dofs
  std::vector<int> u_rows;         // displacement dofs coupled through these stress dofs
  std::vector<int> p_rows;         // pressure dofs (cells) coupled here
  std::vector<int> pz_rows;        // pressure dofs coupled through the velocity dofs
  Eigen::MatrixXd U;               // stress_div rows (|u_rows| x |stress_dofs|)
  Eigen::MatrixXd P;               // stress_pres rows (|p_rows| x |stress_dofs|)
  Eigen::MatrixXd Zp;              // vel_div rows (|pz_rows| x |velocity_dofs|)
  double gamma_schur = 0;          // rotation Schur scalar G S^-1 G^T
  bool rotation_fixed = false;
};

/// The cell-centered displacement-pressure system
///   [ A11  A12 ] [u]   [r_u]
///   [ A21  A22 ] [p] = [r_p],  A21 = -A12^T exactly,
/// together with everything needed to reduce right-hand sides and recover the
/// eliminated stress, velocity and rotation.
struct ReducedSystem {
  SpMat A11, A12, A21, A22;
  double dt = 1.0;
  std::vector<LocalVertexSystem> locals;
  // constraint bookkeeping: fixed dofs in a stable order plus the columns of
  // the original blocks at those dofs, used to fold known values into
  // right-hand sides.
  std::vector<Constraint> stress_fixed, velocity_fixed;
  std::vector<int> rotation_fixed;
  SpMat C_ss, C_ds, C_sg, C_sp;  // columns of the stress blocks at fixed stress dofs
  SpMat C_zz, C_dz;              // columns of the velocity blocks at fixed velocity dofs
  int n_sigma = 0, n_u = 0, n_gamma = 0, n_z = 0, n_p = 0;
  // preconditioner factorizations (built on demand by solve_reduced)
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> fac11, fac22;
};

struct ReducedRhs {
  Eigen::VectorXd r_u, r_p;
  // constraint-adjusted row data kept for the recovery pass
  Eigen::VectorXd b_sigma_mod, b_gamma_mod, b_z_mod;
};

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0;
  bool converged = true;
};

struct RecoveredFields {
  Eigen::VectorXd sigma, gamma, z;
};

std::vector<LocalVertexSystem> build_local_systems(const BlockSystem& blocks, const Mesh& mesh,
                                                   const DofMaps& dofs, const ConstraintSet& cs,
                                                   ExecPolicy policy = ExecPolicy::openmp);

/// Assembles the Schur complements of the three-stage elimination
/// (stress, velocity, rotation) into the reduced 2x2 block system. dt is the
/// backward-Euler scaling of the pressure row.
ReducedSystem eliminate(const BlockSystem& blocks, const Mesh& mesh, const DofMaps& dofs,
                        const ConstraintSet& cs, double dt, ExecPolicy policy = ExecPolicy::openmp);

/// Folds the five-field right-hand side through the elimination.
ReducedRhs reduce_rhs(const ReducedSystem& red, const RhsVectors& rhs);

/// Preconditioned restarted GMRES on the reduced system; the preconditioner
/// applies independent direct solves with A11 and A22.
KrylovResult solve_reduced(ReducedSystem& red, const ReducedRhs& rhs, double tol,
                           Eigen::VectorXd& u, Eigen::VectorXd& p, int restart = 50,
                           int max_iterations = 2000);

/// Back-substitution in reverse elimination order; returns full-length
/// coefficient vectors with the essential values filled in.
RecoveredFields recover_fields(const ReducedSystem& red, const ReducedRhs& rhs,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& p);

/// Generic restarted GMRES with right preconditioning.
KrylovResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_A,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_Minv,
                   const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int restart,
                   int max_iterations);

}  // namespace msmfe
