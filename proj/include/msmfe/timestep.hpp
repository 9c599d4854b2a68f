#pragma once

#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <vector>

#include "msmfe/assembly.hpp"
#include "msmfe/reduction.hpp"

namespace msmfe {

struct TimeGrid {
  std::vector<double> times;  // t_0 = 0 < t_1 < ... < t_N = T
  static TimeGrid uniform(double T, double dt);
  int steps() const { return static_cast<int>(times.size()) - 1; }
  double dt(int n) const { return times[n] - times[n - 1]; }  // n in [1, N]
};

/// Coefficient vectors of the five fields at one time level.
struct FieldState {
  Eigen::VectorXd sigma, u, gamma, z, p;
  double time = 0;
};

enum class SolvePath { reduced, full, both };

struct StepperOptions {
  SolvePath path = SolvePath::reduced;
  double tol = 1e-10;  // Krylov relative residual
  int restart = 50;
  int max_iterations = 2000;
  ExecPolicy exec = ExecPolicy::openmp;
};

struct StepDiagnostics {
  int step = 0;
  int iterations = 0;        // Krylov iterations (0 on the full path)
  double residual = 0;       // Krylov relative residual
  double reduced_vs_full = 0;  // max relative field discrepancy in `both` mode
};

struct RunResult {
  std::vector<FieldState> states;  // N+1 entries including the initial state
  std::vector<StepDiagnostics> diagnostics;  // N entries
};

/// Continuous initial fields for the stationary-projection construction of
/// discrete initial data; manufactured problems provide all closures.
struct InitialFields {
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> sigma;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> u;
  std::function<double(const Eigen::Vector2d&)> rotation;  // scalar r of [[0,r],[-r,0]]
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> z;
  std::function<double(const Eigen::Vector2d&)> p;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> div_sigma;
  std::function<double(const Eigen::Vector2d&)> div_z;
};

/// Runs the fully discrete backward-Euler scheme. Each step solves the
/// dt-scaled five-field system either through the cell-centered reduction or
/// by direct factorization of the full saddle-point matrix (the oracle path).
class Stepper {
 public:
  Stepper(const Mesh& mesh, const MaterialModel& model, const SourceData& data,
          StepperOptions opts = {});

  /// Discrete initial data: the stationary system applied to the continuous
  /// initial fields (or the zero state when the data requests it).
  FieldState initial_state(const InitialFields* fields = nullptr);

  FieldState step(const FieldState& prev, double t, double dt, StepDiagnostics* diag = nullptr);

  RunResult run(const TimeGrid& grid, const InitialFields* fields = nullptr);

  const Mesh& mesh() const { return *mesh_; }
  const DofMaps& dofs() const { return dofs_; }
  const BlockSystem& blocks() const { return blocks_; }
  const ConstraintSet& constraints() const { return constraints_; }
  const MaterialModel& model() const { return model_; }

  /// Five-field right-hand side of the step system at time t (time-lag terms
  /// included); exposed for residual checks in tests.
  RhsVectors step_rhs(const FieldState& prev, double t, double dt) const;

  /// Max over the five fields of the relative difference between two states.
  static double state_distance(const FieldState& a, const FieldState& b);

 private:
  FieldState solve_full(const RhsVectors& rhs, double dt, double time);
  FieldState solve_reduced_path(const RhsVectors& rhs, double dt, double time,
                                StepDiagnostics* diag);
  void build_full(double dt);
  void build_reduced(double dt);

  const Mesh* mesh_;
  MaterialModel model_;
  SourceData data_;
  StepperOptions opts_;
  DofMaps dofs_;
  BlockSystem blocks_;
  ConstraintSet constraints_;

  struct FullSolver {
    double dt = -1;
    SpMat matrix;        // constrained
    SpMat fixed_cols;    // pre-constraint columns of the fixed dofs
    std::vector<Constraint> fixed;  // in column order of fixed_cols
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu;
  };
  FullSolver full_;
  std::optional<ReducedSystem> reduced_;
  double reduced_dt_ = -1;
};

/// Relative residuals of the per-step conservation identities: the mass
/// balance row tested with w = 1 and the cellwise momentum balance.
struct BalanceReport {
  double mass = 0;
  double momentum = 0;
};
BalanceReport balance_residuals(const Stepper& stepper, const FieldState& prev,
                                const FieldState& cur, double t, double dt);

}  // namespace msmfe
