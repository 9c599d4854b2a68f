// Benchmark comparing the serial reference kernels against the OpenMP ones:
// block assembly, vertex elimination, and error integration.

#include <chrono>
#include <cstdio>
#include <string>

#include "msmfe/verify.hpp"

using namespace msmfe;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 32;
  const CellType ct =
      (argc > 2 && std::string(argv[2]) == "triangle") ? CellType::triangle : CellType::quadrilateral;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  ManufacturedProblem mp = ct == CellType::quadrilateral ? make_example2() : make_simplicial_mms();
  Mesh mesh = build_rectangle_mesh({0, 0, 1, 1}, n, n, ct);
  if (ct == CellType::quadrilateral) mesh = distort_example2(mesh);
  DofMaps dofs = build_dofmaps(mesh);

  std::printf("mesh: %d x %d %s (%d cells), workers: %d\n", n, n,
              ct == CellType::triangle ? "triangles" : "quads", mesh.n_cells(), worker_count());

  BlockSystem blocks;
  double t_ser = seconds([&] { blocks = assemble_blocks(mesh, dofs, mp.model, ExecPolicy::serial); },
                         reps);
  double t_par = seconds([&] { blocks = assemble_blocks(mesh, dofs, mp.model, ExecPolicy::openmp); },
                         reps);
  std::printf("%-22s serial %8.4fs  openmp %8.4fs  speedup %5.2fx\n", "assemble_blocks", t_ser,
              t_par, t_ser / t_par);

  ConstraintSet cs = essential_constraints(mesh, dofs, mp.data, 0.0);
  ReducedSystem red;
  t_ser = seconds([&] { red = eliminate(blocks, mesh, dofs, cs, mp.dt, ExecPolicy::serial); }, reps);
  t_par = seconds([&] { red = eliminate(blocks, mesh, dofs, cs, mp.dt, ExecPolicy::openmp); }, reps);
  std::printf("%-22s serial %8.4fs  openmp %8.4fs  speedup %5.2fx\n", "eliminate", t_ser, t_par,
              t_ser / t_par);

  Stepper stepper(mesh, mp.model, mp.data, {});
  InitialFields f0 = mp.initial_fields();
  FieldState state = stepper.initial_state(&f0);
  TimeGrid grid = TimeGrid::uniform(mp.dt, mp.dt);
  std::vector<FieldState> states = {state};
  ErrorReport rep;
  t_ser = seconds(
      [&] { rep = compute_errors(mp, states, TimeGrid{{0.0}}, mesh, dofs, ExecPolicy::serial); },
      reps);
  t_par = seconds(
      [&] { rep = compute_errors(mp, states, TimeGrid{{0.0}}, mesh, dofs, ExecPolicy::openmp); },
      reps);
  std::printf("%-22s serial %8.4fs  openmp %8.4fs  speedup %5.2fx\n", "compute_errors", t_ser,
              t_par, t_ser / t_par);
  (void)grid;
  return 0;
}
