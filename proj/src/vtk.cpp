#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "msmfe/cli.hpp"
#include "msmfe/quadrature.hpp"

namespace msmfe {

void write_vtk_snapshot(const Mesh& mesh, const DofMaps& dofs, const FieldState& state,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open VTK output: " + path);
  char buf[160];
  const int s = mesh.corners();

  out << "# vtk DataFile Version 3.0\n";
  out << "msmfe snapshot t=" << state.time << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x(), p.y());
    out << buf;
  }
  out << "CELLS " << mesh.n_cells() << " " << mesh.n_cells() * (s + 1) << "\n";
  for (const auto& c : mesh.cells) {
    out << s;
    for (int i = 0; i < s; ++i) out << " " << c[i];
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  const int vtk_type = mesh.cell_type == CellType::triangle ? 5 : 9;
  for (int c = 0; c < mesh.n_cells(); ++c) out << vtk_type << "\n";

  FieldEvaluator ev{&mesh, &dofs};
  const QuadratureRule vr = vertex_rule(mesh.cell_type);

  out << "CELL_DATA " << mesh.n_cells() << "\n";
  out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::snprintf(buf, sizeof buf, "%.17g\n", state.p[c]);
    out << buf;
  }
  out << "VECTORS u double\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", state.u[2 * c], state.u[2 * c + 1]);
    out << buf;
  }
  out << "SCALARS gamma double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    double g = 0;
    for (int i = 0; i < s; ++i) g += state.gamma[mesh.cells[c][i]];
    std::snprintf(buf, sizeof buf, "%.17g\n", g / s);
    out << buf;
  }
  // z and the stress rows: cell averages of the vertex-rule samples.
  out << "VECTORS z double\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Eigen::Vector2d zc = Eigen::Vector2d::Zero();
    for (const auto& pt : vr.points) zc += ev.velocity(state.z, c, pt);
    zc /= s;
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", zc.x(), zc.y());
    out << buf;
  }
  for (int row = 0; row < 2; ++row) {
    out << "VECTORS sigma_row_" << (row == 0 ? "x" : "y") << " double\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
      Eigen::Vector2d sc = Eigen::Vector2d::Zero();
      for (const auto& pt : vr.points) sc += ev.stress(state.sigma, c, pt).row(row).transpose();
      sc /= s;
      std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", sc.x(), sc.y());
      out << buf;
    }
  }
}

}  // namespace msmfe
