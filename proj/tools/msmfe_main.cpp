#include <CLI11.hpp>
#include <iostream>

#include "msmfe/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cell-centered mixed finite element solver for Biot poroelasticity"};
  app.require_subcommand(1);

  std::string config_path, out_dir, path;
  double tol = -1;
  int levels = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "flat key=value configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--path", path, "solve path: reduced|full|both (overrides config)");
    cmd->add_option("--tol", tol, "Krylov relative residual tolerance (overrides config)");
  };
  CLI::App* converge = app.add_subcommand("converge", "run a manufactured convergence study");
  add_common(converge);
  converge->add_option("--levels", levels, "number of refinement levels (overrides config)");
  CLI::App* run = app.add_subcommand("run", "time-step an experiment and export fields");
  add_common(run);

  CLI11_PARSE(app, argc, argv);

  msmfe::RunConfig config;
  try {
    config = msmfe::parse_config_file(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!path.empty()) {
      if (path != "reduced" && path != "full" && path != "both")
        throw std::runtime_error("--path must be reduced, full or both");
      config.path = path;
    }
    if (tol > 0) config.tol = tol;
    if (levels > 0) config.levels = levels;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (converge->parsed()) return msmfe::cmd_converge(config);
  return msmfe::cmd_run(config);
}
