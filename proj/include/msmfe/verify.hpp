#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "msmfe/timestep.hpp"

namespace msmfe {

/// Closed-form exact solution with derived stress, velocity, rotation and
/// sources. The derivative closures are hand-derived; the test suite checks
/// them against finite differences so a transcription slip cannot pass.
struct ManufacturedProblem {
  ScalarField p;
  VectorField u;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&, double)> sigma;
  VectorField z;
  ScalarField rotation;  // scalar r of gamma = [[0, r], [-r, 0]]
  VectorField f;
  ScalarField q;
  ScalarField div_z;  // closed form (div sigma is -f)

  MaterialModel model;
  SourceData data;
  CellType cell_type;
  std::function<Mesh(int)> mesh_for_level;
  std::function<double(int)> h_for_level;
  double T = 1e-3, dt = 1e-4;

  InitialFields initial_fields() const;
};

/// Distorted-quadrilateral convergence problem: p = e^t (sin(pi x) cos(pi y) + 10)
/// with variable Young modulus and full permeability tensor on the
/// h^2-parallelogram mesh hierarchy.
ManufacturedProblem make_example2();

/// The same exact solution and coefficients on structured triangle meshes of
/// the unit square.
ManufacturedProblem make_simplicial_mms();

enum class ErrField { sigma, div_sigma, u, gamma, z, div_z, p };
enum class ErrNorm { l2, linf };
constexpr int kNumErrFields = 7;

const char* to_string(ErrField f);
const char* to_string(ErrNorm n);

/// Discrete-in-time error norms: l2(0,T;L2) sums over steps 1..N with weights
/// dt_n, l-infinity(0,T;L2) maximizes over 0..N. Spatial integrals use the
/// order-5 Gauss rule. Relative errors divide by the same norm of the exact
/// field.
struct ErrorReport {
  double h = 0;
  std::array<std::array<double, 2>, kNumErrFields> absolute{};
  std::array<std::array<double, 2>, kNumErrFields> exact_norm{};
  double get(ErrField f, ErrNorm n, bool relative = true) const {
    const double a = absolute[int(f)][int(n)];
    if (!relative) return a;
    const double d = exact_norm[int(f)][int(n)];
    return d > 0 ? a / d : a;
  }
};

ErrorReport compute_errors(const ManufacturedProblem& problem, const std::vector<FieldState>& states,
                           const TimeGrid& grid, const Mesh& mesh, const DofMaps& dofs,
                           ExecPolicy policy = ExecPolicy::openmp);

struct ConvergenceRow {
  double h;
  std::string field;
  std::string norm;
  double error;
  double rate;  // log2(e_coarse / e_fine); NaN on the first level
};

struct ConvergenceTable {
  std::vector<ErrorReport> reports;
  std::vector<ConvergenceRow> rows;
  /// Worst observed rate over all tabulated rows (ignoring first-level rows).
  double min_rate() const;
  double min_rate(const std::string& field) const;
  void write_csv(std::ostream& out) const;  // columns: h,field,norm,error,rate
};

/// Runs the manufactured problem across `levels` refinement levels and
/// tabulates errors and rates. `reduced_vs_full` (optional) receives the max
/// relative discrepancy between the two solve paths when opts.path == both.
ConvergenceTable convergence_study(const ManufacturedProblem& problem, int levels,
                                   StepperOptions opts = {}, double* reduced_vs_full = nullptr);

/// Rates from a precomputed error sequence (used with synthetic inputs).
std::vector<double> rates_from_errors(const std::vector<double>& errors);

/// Checkerboard diagnostics of a cellwise pressure field: a cell is a strict
/// checkerboard cell if its difference to every edge-neighbor has the same
/// nonzero sign and exceeds 1e-8 times the field range. The oscillation ratio
/// is the mean interior-edge jump normalized by the field range.
struct CheckerboardReport {
  int strict_cells = 0;
  double oscillation_ratio = 0;
};
CheckerboardReport checkerboard_indicator(const Eigen::VectorXd& p, const Mesh& mesh);

}  // namespace msmfe
