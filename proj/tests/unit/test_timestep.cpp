#include <doctest.h>

#include <cmath>

#include "msmfe/cli.hpp"
#include "msmfe/timestep.hpp"
#include "msmfe/verify.hpp"

using namespace msmfe;

TEST_CASE("time grid") {
  TimeGrid g = TimeGrid::uniform(1e-3, 1e-4);
  CHECK(g.steps() == 10);
  CHECK(g.times.front() == 0.0);
  CHECK(g.times.back() == doctest::Approx(1e-3));
  CHECK(g.dt(1) == doctest::Approx(1e-4));
  CHECK_THROWS(TimeGrid::uniform(1.0, 0.0));
  CHECK_THROWS(TimeGrid::uniform(1e-4, 1e-3));

  TimeGrid g3 = TimeGrid::uniform(50.0, 1.0);
  CHECK(g3.steps() == 50);
}

TEST_CASE("zero-data run stays identically zero") {
  RunConfig config;
  config.experiment = "custom";
  config.nx = 3;
  config.ny = 3;
  ExperimentSetup ex = make_experiment(config);
  Stepper stepper(ex.mesh, ex.model, ex.data, {});
  RunResult run = stepper.run(TimeGrid::uniform(5e-4, 1e-4));
  CHECK(run.states.size() == 6);
  for (const auto& s : run.states) {
    CHECK(s.sigma.norm() == 0.0);
    CHECK(s.u.norm() == 0.0);
    CHECK(s.gamma.norm() == 0.0);
    CHECK(s.z.norm() == 0.0);
    CHECK(s.p.norm() == 0.0);
  }
  for (const auto& d : run.diagnostics) CHECK(d.iterations == 0);
}

TEST_CASE("initial state: projection consistency of the velocity row") {
  ManufacturedProblem mp = make_example2();
  Mesh m = mp.mesh_for_level(0);
  Stepper stepper(m, mp.model, mp.data, {});
  InitialFields f0 = mp.initial_fields();
  FieldState s0 = stepper.initial_state(&f0);
  CHECK(s0.time == 0.0);
  // the z row of the stationary projection system holds with the assembled
  // right-hand side (z0, p0 consistency)
  const BlockSystem& B = stepper.blocks();
  // rebuild the projection functional for the z row only: it equals the
  // assembled row residual, which the direct solve drove to zero
  Eigen::VectorXd r = B.vel_mass * s0.z - B.vel_div.transpose() * s0.p;
  // compare against the same functional applied to the continuous data: the
  // difference is the solver residual
  // (the full assembled rhs is not exposed; test via a fresh solve residual)
  Stepper oracle(m, mp.model, mp.data, {});
  FieldState again = oracle.initial_state(&f0);
  Eigen::VectorXd r2 = B.vel_mass * again.z - B.vel_div.transpose() * again.p;
  CHECK((r - r2).norm() <= 1e-10 * (1 + r.norm()));
  // and the projection reproduces the exact fields to first order: errors at
  // t = 0 must be small relative to the field size
  DofMaps dofs = stepper.dofs();
  TimeGrid trivial{{0.0}};
  ErrorReport rep = compute_errors(mp, {s0}, trivial, m, dofs);
  CHECK(rep.get(ErrField::p, ErrNorm::linf) < 0.05);
  CHECK(rep.get(ErrField::sigma, ErrNorm::linf) < 0.25);
}

TEST_CASE("initial state: elliptic projection errors decrease at first order") {
  ManufacturedProblem mp = make_example2();
  std::vector<double> perr, serr;
  for (int level = 0; level < 3; ++level) {
    Mesh m = mp.mesh_for_level(level);
    Stepper stepper(m, mp.model, mp.data, {});
    InitialFields f0 = mp.initial_fields();
    FieldState s0 = stepper.initial_state(&f0);
    TimeGrid trivial{{0.0}};
    ErrorReport rep = compute_errors(mp, {s0}, trivial, m, stepper.dofs());
    perr.push_back(rep.get(ErrField::p, ErrNorm::linf));
    serr.push_back(rep.get(ErrField::sigma, ErrNorm::linf));
  }
  for (auto rates : {rates_from_errors(perr), rates_from_errors(serr)})
    for (double r : rates) CHECK(r >= 0.9);
}

TEST_CASE("steady state is a fixed point of the step") {
  // time-independent manufactured data admits a stationary discrete solution;
  // stepping from it must return the same coefficients
  ManufacturedProblem mp = make_example2();
  Mesh m = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, CellType::quadrilateral));

  // freeze the solution at t = 0 by removing all time dependence
  ManufacturedProblem frozen = mp;
  frozen.p = [&mp](const Eigen::Vector2d& x, double) { return mp.p(x, 0.0); };
  frozen.u = [&mp](const Eigen::Vector2d& x, double) { return mp.u(x, 0.0); };
  frozen.sigma = [&mp](const Eigen::Vector2d& x, double) { return mp.sigma(x, 0.0); };
  frozen.z = [&mp](const Eigen::Vector2d& x, double) { return mp.z(x, 0.0); };
  frozen.rotation = [&mp](const Eigen::Vector2d& x, double) { return mp.rotation(x, 0.0); };
  frozen.f = [&mp](const Eigen::Vector2d& x, double) { return mp.f(x, 0.0); };
  frozen.div_z = [&mp](const Eigen::Vector2d& x, double) { return mp.div_z(x, 0.0); };
  // steady mass balance: time-derivative terms vanish, q = div z
  frozen.q = [&mp](const Eigen::Vector2d& x, double) { return mp.div_z(x, 0.0); };
  SourceData d = mp.data;
  d.body_force = frozen.f;
  d.fluid_source = frozen.q;
  for (auto& [tag, fn] : d.dirichlet_displacement) fn = frozen.u;
  for (auto& [tag, fn] : d.dirichlet_pressure) fn = frozen.p;
  frozen.data = d;

  StepperOptions opts;
  opts.tol = 1e-13;
  Stepper stepper(m, frozen.model, frozen.data, opts);
  InitialFields f0 = frozen.initial_fields();
  FieldState s = stepper.initial_state(&f0);
  const FieldState s0 = s;
  for (int n = 1; n <= 3; ++n) {
    s = stepper.step(s, n * 0.1, 0.1);
    CHECK(Stepper::state_distance(s, s0) <= 1e-10);
  }
}

TEST_CASE("reduced and full paths agree along a 10-step run") {
  ManufacturedProblem mp = make_example2();
  Mesh m = mp.mesh_for_level(0);
  StepperOptions opts;
  opts.path = SolvePath::both;
  opts.tol = 1e-12;
  Stepper stepper(m, mp.model, mp.data, opts);
  InitialFields f0 = mp.initial_fields();
  RunResult run = stepper.run(TimeGrid::uniform(mp.T, mp.dt), &f0);
  REQUIRE(run.diagnostics.size() == 10);
  for (const auto& diag : run.diagnostics) CHECK(diag.reduced_vs_full <= 1e-8);
}

TEST_CASE("conservation identities hold per step") {
  ManufacturedProblem mp = make_example2();
  Mesh m = mp.mesh_for_level(0);
  StepperOptions opts;
  opts.tol = 1e-12;
  Stepper stepper(m, mp.model, mp.data, opts);
  InitialFields f0 = mp.initial_fields();
  RunResult run = stepper.run(TimeGrid::uniform(mp.T, mp.dt), &f0);
  for (size_t n = 1; n < run.states.size(); ++n) {
    BalanceReport rep = balance_residuals(stepper, run.states[n - 1], run.states[n],
                                          run.states[n].time, mp.dt);
    CHECK(rep.mass <= 1e-9);
    CHECK(rep.momentum <= 1e-9);
  }
}

TEST_CASE("zero storativity: the cantilever step stays finite") {
  ExperimentSetup ex = make_cantilever(8, 8, 1e-3, 1e-3, CellType::quadrilateral);
  CHECK(ex.model.c0 == 0.0);
  CHECK(ex.model.alpha == doctest::Approx(0.93));
  StepperOptions opts;
  opts.tol = 1e-11;
  Stepper stepper(ex.mesh, ex.model, ex.data, opts);
  FieldState s0 = stepper.initial_state();
  FieldState s1 = stepper.step(s0, 1e-3, 1e-3);
  CHECK(std::isfinite(s1.p.lpNorm<Eigen::Infinity>()));
  CHECK(std::isfinite(s1.u.lpNorm<Eigen::Infinity>()));
  CHECK(s1.p.norm() > 0);
  CHECK(s1.u.norm() > 0);
}

TEST_CASE("run length matches the grid") {
  RunConfig config;
  config.experiment = "custom";
  config.nx = 2;
  config.ny = 2;
  ExperimentSetup ex = make_experiment(config);
  Stepper stepper(ex.mesh, ex.model, ex.data, {});
  RunResult one = stepper.run(TimeGrid::uniform(1e-4, 1e-4));
  CHECK(one.states.size() == 2);
  CHECK(one.diagnostics.size() == 1);
}
