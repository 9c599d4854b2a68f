#include "msmfe/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "msmfe/quadrature.hpp"

namespace msmfe {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  bool have_experiment = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") {
        c.experiment = val;
        have_experiment = true;
      } else if (key == "mesh_file")
        c.mesh_file = val;
      else if (key == "cell_type")
        c.cell_type = val;
      else if (key == "nx")
        c.nx = std::stoi(val);
      else if (key == "ny")
        c.ny = std::stoi(val);
      else if (key == "levels")
        c.levels = std::stoi(val);
      else if (key == "T")
        c.T = std::stod(val);
      else if (key == "dt")
        c.dt = std::stod(val);
      else if (key == "tol")
        c.tol = std::stod(val);
      else if (key == "path")
        c.path = val;
      else if (key == "out")
        c.out_dir = val;
      else if (key == "snapshot_every")
        c.snapshot_every = std::stoi(val);
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (!have_experiment) throw std::runtime_error("config: missing required key 'experiment'");
  if (c.levels < 1) throw std::runtime_error("config: levels must be >= 1");
  if (c.path != "reduced" && c.path != "full" && c.path != "both")
    throw std::runtime_error("config: path must be reduced, full or both");
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

ExperimentSetup make_footing(int nx, int ny, double T, double dt) {
  if (nx <= 0) nx = 24;
  if (ny <= 0) ny = 18;
  if (nx % 3 != 0)
    throw std::runtime_error("footing: nx must be a multiple of 3 to resolve the load strip");
  ExperimentSetup ex;
  Mesh base = build_rectangle_mesh({-50, 0, 50, 75}, nx, ny, CellType::triangle);
  ex.mesh = retag_boundary(base, [](const Eigen::Vector2d& mid, const std::string& tag) {
    if (tag == "top") return std::abs(mid.x()) < 50.0 / 3.0 ? std::string("gamma1") : std::string("gamma2");
    return std::string("gamma3");
  });
  ex.model = material_preset("example3");

  const double sigma0 = 1e4;
  SourceData d;
  d.body_force = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.fluid_source = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.traction["gamma1"] = [sigma0](const Eigen::Vector2d&, double) {
    return Eigen::Vector2d(0, -sigma0);
  };
  d.traction["gamma2"] = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.dirichlet_displacement["gamma3"] = [](const Eigen::Vector2d&, double) {
    return Eigen::Vector2d::Zero().eval();
  };
  for (const char* tag : {"gamma1", "gamma2", "gamma3"})
    d.dirichlet_pressure[tag] = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.initial_pressure = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.zero_initial_state = true;
  ex.data = d;
  ex.grid = TimeGrid::uniform(T > 0 ? T : 50.0, dt > 0 ? dt : 1.0);
  return ex;
}

ExperimentSetup make_cantilever(int nx, int ny, double T, double dt, CellType cell_type) {
  if (nx <= 0) nx = 16;
  if (ny <= 0) ny = nx;
  ExperimentSetup ex;
  ex.mesh = build_rectangle_mesh({0, 0, 1, 1}, nx, ny, cell_type);
  ex.model = material_preset("example4");

  SourceData d;
  d.body_force = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.fluid_source = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.traction["top"] = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d(0, -1); };
  d.traction["bottom"] = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.traction["right"] = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.dirichlet_displacement["left"] = [](const Eigen::Vector2d&, double) {
    return Eigen::Vector2d::Zero().eval();
  };
  for (const char* tag : {"left", "right", "bottom", "top"})
    d.normal_flux[tag] = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.pure_neumann_pressure = true;
  d.initial_pressure = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.zero_initial_state = true;
  ex.data = d;
  ex.grid = TimeGrid::uniform(T > 0 ? T : 1.0, dt > 0 ? dt : 1e-3);
  return ex;
}

namespace {

ExperimentSetup make_custom(const RunConfig& config) {
  ExperimentSetup ex;
  const CellType ct = config.cell_type == "triangle" ? CellType::triangle : CellType::quadrilateral;
  if (!config.mesh_file.empty())
    ex.mesh = read_mesh_file(config.mesh_file);
  else
    ex.mesh = build_rectangle_mesh({0, 0, 1, 1}, config.nx > 0 ? config.nx : 8,
                                   config.ny > 0 ? config.ny : 8, ct);
  MaterialModel m;
  m.mu = [](const Eigen::Vector2d&) { return 1.0; };
  m.lambda = [](const Eigen::Vector2d&) { return 1.0; };
  m.permeability = [](const Eigen::Vector2d&) { return Eigen::Matrix2d(Eigen::Matrix2d::Identity()); };
  m.c0 = 1.0;
  m.alpha = 1.0;
  ex.model = m;

  SourceData d;
  d.body_force = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.fluid_source = [](const Eigen::Vector2d&, double) { return 0.0; };
  std::set<std::string> tags;
  for (int e = 0; e < ex.mesh.n_edges(); ++e)
    if (ex.mesh.edges[e].boundary()) tags.insert(ex.mesh.edge_tag[e]);
  for (const auto& tag : tags) {
    d.dirichlet_displacement[tag] = [](const Eigen::Vector2d&, double) {
      return Eigen::Vector2d::Zero().eval();
    };
    d.dirichlet_pressure[tag] = [](const Eigen::Vector2d&, double) { return 0.0; };
  }
  d.initial_pressure = [](const Eigen::Vector2d&, double) { return 0.0; };
  d.zero_initial_state = true;
  ex.data = d;
  ex.grid = TimeGrid::uniform(config.T > 0 ? config.T : 1e-3, config.dt > 0 ? config.dt : 1e-4);
  return ex;
}

}  // namespace

ExperimentSetup make_experiment(const RunConfig& config) {
  if (config.experiment == "example2" || config.experiment == "simplicial_mms") {
    ExperimentSetup ex;
    ManufacturedProblem mp =
        config.experiment == "example2" ? make_example2() : make_simplicial_mms();
    if (config.T > 0) mp.T = config.T;
    if (config.dt > 0) mp.dt = config.dt;
    ex.mesh = mp.mesh_for_level(0);
    ex.model = mp.model;
    ex.data = mp.data;
    ex.grid = TimeGrid::uniform(mp.T, mp.dt);
    ex.mms = std::move(mp);
    return ex;
  }
  if (config.experiment == "footing") return make_footing(config.nx, config.ny, config.T, config.dt);
  if (config.experiment == "cantilever")
    return make_cantilever(config.nx, config.ny, config.T, config.dt,
                           config.cell_type == "triangle" ? CellType::triangle
                                                          : CellType::quadrilateral);
  if (config.experiment == "custom") return make_custom(config);
  throw std::runtime_error("unknown experiment: " + config.experiment);
}

namespace {

StepperOptions options_from(const RunConfig& config) {
  StepperOptions o;
  o.tol = config.tol;
  if (config.path == "full")
    o.path = SolvePath::full;
  else if (config.path == "both")
    o.path = SolvePath::both;
  else
    o.path = SolvePath::reduced;
  return o;
}

}  // namespace

int cmd_converge(const RunConfig& config) {
  try {
    ExperimentSetup ex = make_experiment(config);
    if (!ex.mms) {
      std::cerr << "converge: experiment '" << config.experiment
                << "' has no manufactured solution\n";
      return 2;
    }
    std::filesystem::create_directories(config.out_dir);
    double discrepancy = 0;
    StepperOptions opts = options_from(config);
    ConvergenceTable table;
    try {
      table = convergence_study(*ex.mms, config.levels, opts,
                                opts.path == SolvePath::both ? &discrepancy : nullptr);
    } catch (const std::exception& e) {
      std::cerr << "solver failure: " << e.what() << "\n";
      return 3;
    }
    const std::string csv_path = config.out_dir + "/errors.csv";
    std::ofstream csv(csv_path);
    table.write_csv(csv);
    if (opts.path == SolvePath::both) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", discrepancy);
      csv << "# max reduced-vs-full discrepancy," << buf << "\n";
    }
    csv.close();

    // Human-readable rate summary.
    std::cout << "levels: " << config.levels << ", coarsest h = " << ex.mms->h_for_level(0)
              << "\n";
    for (const char* field : {"sigma", "div_sigma", "u", "gamma", "z", "div_z", "p"}) {
      const double r = table.min_rate(field);
      if (std::isfinite(r)) std::cout << "  min rate " << field << ": " << r << "\n";
    }
    if (opts.path == SolvePath::both)
      std::cout << "  max reduced-vs-full discrepancy: " << discrepancy << "\n";
    std::cout << "errors written to " << csv_path << "\n";
    if (config.levels >= 2 && table.min_rate() < 0.8) {
      std::cerr << "convergence failure: observed rate " << table.min_rate() << " < 0.8\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_run(const RunConfig& config) {
  try {
    ExperimentSetup ex = make_experiment(config);
    std::filesystem::create_directories(config.out_dir);
    StepperOptions opts = options_from(config);
    Stepper stepper(ex.mesh, ex.model, ex.data, opts);

    std::optional<InitialFields> f0;
    if (ex.mms) f0 = ex.mms->initial_fields();

    std::ofstream diag(config.out_dir + "/diagnostics.csv");
    diag << "step,iterations,residual,checkerboard,oscillation\n";

    FieldState state;
    try {
      state = stepper.initial_state(f0 ? &*f0 : nullptr);
      char buf[256];
      for (int n = 1; n <= ex.grid.steps(); ++n) {
        StepDiagnostics sd;
        sd.step = n;
        state = stepper.step(state, ex.grid.times[n], ex.grid.dt(n), &sd);
        const CheckerboardReport cb = checkerboard_indicator(state.p, ex.mesh);
        std::snprintf(buf, sizeof buf, "%d,%d,%.3e,%d,%.6e\n", n, sd.iterations, sd.residual,
                      cb.strict_cells, cb.oscillation_ratio);
        diag << buf;
        if (config.snapshot_every > 0 && n % config.snapshot_every == 0) {
          std::snprintf(buf, sizeof buf, "%s/snapshot_%04d.vtk", config.out_dir.c_str(), n);
          write_vtk_snapshot(ex.mesh, stepper.dofs(), state, buf);
        }
      }
    } catch (const std::exception& e) {
      std::cerr << "solver failure: " << e.what() << "\n";
      return 3;
    }
    std::cout << "run complete: " << ex.grid.steps() << " steps, diagnostics in "
              << config.out_dir << "/diagnostics.csv\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace msmfe
