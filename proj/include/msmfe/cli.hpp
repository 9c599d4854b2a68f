#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "msmfe/verify.hpp"

namespace msmfe {

/// Batch-run configuration. Parsed from a flat key=value file with '#'
/// comments; every key has a default except "experiment".
struct RunConfig {
  std::string experiment;  // example2 | simplicial_mms | footing | cantilever | custom
  std::string mesh_file;   // optional; otherwise a generated mesh is used
  std::string cell_type = "";  // "quad" | "triangle"; default depends on the experiment
  int nx = 0, ny = 0;          // generated-mesh resolution (0 = per-experiment default)
  int levels = 4;
  double T = -1, dt = -1;  // negative = per-experiment default
  double tol = 1e-10;
  std::string path = "reduced";  // reduced | full | both
  std::string out_dir = ".";
  int snapshot_every = 0;  // write a VTK snapshot every k-th step (0 = none)
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// A fully wired experiment: mesh, coefficients, data, and optionally the
/// manufactured problem driving a convergence study.
struct ExperimentSetup {
  Mesh mesh;
  MaterialModel model;
  SourceData data;
  TimeGrid grid;
  std::optional<ManufacturedProblem> mms;
};

ExperimentSetup make_experiment(const RunConfig& config);

/// Footing problem: strip load on top of a rectangular soil block, fixed
/// lateral/bottom boundary, fully draining boundary.
ExperimentSetup make_footing(int nx, int ny, double T, double dt);

/// Cantilever bracket: downward traction on top, clamped left edge, no-flow
/// boundary everywhere.
ExperimentSetup make_cantilever(int nx, int ny, double T, double dt, CellType cell_type);

/// Exit codes: 0 success, 1 convergence-rate failure, 2 config error,
/// 3 solver failure.
int cmd_converge(const RunConfig& config);
int cmd_run(const RunConfig& config);

/// Legacy ASCII VTK snapshot with cell data: p, u, cell-averaged gamma, and
/// the cell-averaged vertex samples of z and the two stress rows.
void write_vtk_snapshot(const Mesh& mesh, const DofMaps& dofs, const FieldState& state,
                        const std::string& path);

}  // namespace msmfe
