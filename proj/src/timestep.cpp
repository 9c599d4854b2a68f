#include "msmfe/timestep.hpp"

#include <cmath>
#include <stdexcept>

#include "msmfe/quadrature.hpp"

namespace msmfe {

TimeGrid TimeGrid::uniform(double T, double dt) {
  if (!(dt > 0) || !(T >= dt)) throw std::invalid_argument("TimeGrid: need 0 < dt <= T");
  TimeGrid g;
  const int n = static_cast<int>(std::round(T / dt));
  if (std::abs(n * dt - T) > 1e-9 * T)
    throw std::invalid_argument("TimeGrid: T must be a multiple of dt");
  g.times.resize(n + 1);
  for (int i = 0; i <= n; ++i) g.times[i] = i * dt;
  g.times[n] = T;
  return g;
}

Stepper::Stepper(const Mesh& mesh, const MaterialModel& model, const SourceData& data,
                 StepperOptions opts)
    : mesh_(&mesh), model_(model), data_(data), opts_(opts) {
  std::vector<std::string> tags;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (mesh.edges[e].boundary()) {
      if (mesh.edge_tag[e].empty())
        throw std::runtime_error("Stepper: untagged boundary edge " + std::to_string(e));
      tags.push_back(mesh.edge_tag[e]);
    }
  validate_boundary_partition(data_, tags);
  dofs_ = build_dofmaps(mesh);
  blocks_ = assemble_blocks(mesh, dofs_, model_, opts_.exec);
  constraints_ = essential_constraints(mesh, dofs_, data_, 0.0);
}

namespace {

// Offsets of the five fields inside the monolithic vector.
struct Offsets {
  int sigma, u, gamma, z, p, total;
};

Offsets offsets(const DofMaps& dofs) {
  Offsets o;
  o.sigma = 0;
  o.u = dofs.stress.n_dofs;
  o.gamma = o.u + dofs.displacement.n_dofs;
  o.z = o.gamma + dofs.rotation.n_dofs;
  o.p = o.z + dofs.velocity.n_dofs;
  o.total = o.p + dofs.pressure.n_dofs;
  return o;
}

void append_block(std::vector<Eigen::Triplet<double>>& t, const SpMat& A, int row0, int col0,
                  double scale) {
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

void append_block_transposed(std::vector<Eigen::Triplet<double>>& t, const SpMat& A, int row0,
                             int col0, double scale) {
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      t.emplace_back(row0 + it.col(), col0 + it.row(), scale * it.value());
}

}  // namespace

void Stepper::build_full(double dt) {
  if (full_.lu && full_.dt == dt) return;
  const Offsets o = offsets(dofs_);
  std::vector<Eigen::Triplet<double>> t;
  // sigma row: A_ss sigma + D_s^T u + A_sg^T gamma + A_sp^T p = b_sigma
  append_block(t, blocks_.stress_mass, o.sigma, o.sigma, 1.0);
  append_block_transposed(t, blocks_.stress_div, o.sigma, o.u, 1.0);
  append_block_transposed(t, blocks_.stress_rot, o.sigma, o.gamma, 1.0);
  append_block_transposed(t, blocks_.stress_pres, o.sigma, o.p, 1.0);
  // u row: -D_s sigma = b_u
  append_block(t, blocks_.stress_div, o.u, o.sigma, -1.0);
  // gamma row: -A_sg sigma = b_gamma
  append_block(t, blocks_.stress_rot, o.gamma, o.sigma, -1.0);
  // z row: A_zz z - D_z^T p = b_z
  append_block(t, blocks_.vel_mass, o.z, o.z, 1.0);
  append_block_transposed(t, blocks_.vel_div, o.z, o.p, -1.0);
  // p row (dt-scaled): A_sp sigma + dt D_z z + A_pp p = b_p
  append_block(t, blocks_.stress_pres, o.p, o.sigma, 1.0);
  append_block(t, blocks_.vel_div, o.p, o.z, dt);
  append_block(t, blocks_.pres_mass, o.p, o.p, 1.0);

  SpMat A(o.total, o.total);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();

  full_.fixed.clear();
  for (const auto& c : constraints_.stress) full_.fixed.push_back({o.sigma + c.dof, c.value});
  for (const auto& c : constraints_.velocity) full_.fixed.push_back({o.z + c.dof, c.value});
  for (int v : constraints_.rotation_fixed) full_.fixed.push_back({o.gamma + v, 0.0});

  std::vector<Eigen::Triplet<double>> ct;
  for (size_t j = 0; j < full_.fixed.size(); ++j)
    for (SpMat::InnerIterator it(A, full_.fixed[j].dof); it; ++it)
      ct.emplace_back(it.row(), static_cast<int>(j), it.value());
  full_.fixed_cols.resize(o.total, full_.fixed.size());
  full_.fixed_cols.setFromTriplets(ct.begin(), ct.end());

  Eigen::VectorXd dummy = Eigen::VectorXd::Zero(o.total);
  apply_essential_bc(A, dummy, full_.fixed);
  full_.matrix = A;
  full_.lu = std::make_unique<Eigen::SparseLU<SpMat>>();
  full_.lu->compute(A);
  if (full_.lu->info() != Eigen::Success)
    throw std::runtime_error("Stepper: full saddle-point factorization failed");
  full_.dt = dt;
}

void Stepper::build_reduced(double dt) {
  if (reduced_ && reduced_dt_ == dt) return;
  reduced_ = eliminate(blocks_, *mesh_, dofs_, constraints_, dt, opts_.exec);
  reduced_dt_ = dt;
}

RhsVectors Stepper::step_rhs(const FieldState& prev, double t, double dt) const {
  RhsVectors rhs = assemble_rhs(*mesh_, dofs_, data_, t, dt);
  rhs.b_p += blocks_.stress_pres * prev.sigma + blocks_.pres_mass * prev.p;
  return rhs;
}

FieldState Stepper::solve_full(const RhsVectors& rhs, double dt, double time) {
  build_full(dt);
  const Offsets o = offsets(dofs_);
  Eigen::VectorXd b(o.total);
  b << rhs.b_sigma, rhs.b_u, rhs.b_gamma, rhs.b_z, rhs.b_p;

  Eigen::VectorXd g(full_.fixed.size());
  for (size_t i = 0; i < full_.fixed.size(); ++i) g[i] = full_.fixed[i].value;
  b -= full_.fixed_cols * g;
  for (size_t i = 0; i < full_.fixed.size(); ++i) b[full_.fixed[i].dof] = full_.fixed[i].value;

  Eigen::VectorXd x = full_.lu->solve(b);
  if (full_.lu->info() != Eigen::Success)
    throw std::runtime_error("Stepper: full saddle-point solve failed");

  FieldState s;
  s.sigma = x.segment(o.sigma, dofs_.stress.n_dofs);
  s.u = x.segment(o.u, dofs_.displacement.n_dofs);
  s.gamma = x.segment(o.gamma, dofs_.rotation.n_dofs);
  s.z = x.segment(o.z, dofs_.velocity.n_dofs);
  s.p = x.segment(o.p, dofs_.pressure.n_dofs);
  s.time = time;
  return s;
}

FieldState Stepper::solve_reduced_path(const RhsVectors& rhs, double dt, double time,
                                       StepDiagnostics* diag) {
  build_reduced(dt);
  ReducedRhs rr = reduce_rhs(*reduced_, rhs);
  Eigen::VectorXd u, p;
  KrylovResult kr = solve_reduced(*reduced_, rr, opts_.tol, u, p, opts_.restart,
                                  opts_.max_iterations);
  RecoveredFields rec = recover_fields(*reduced_, rr, u, p);
  if (diag) {
    diag->iterations = kr.iterations;
    diag->residual = kr.rel_residual;
  }
  FieldState s;
  s.sigma = rec.sigma;
  s.u = u;
  s.gamma = rec.gamma;
  s.z = rec.z;
  s.p = p;
  s.time = time;
  return s;
}

double Stepper::state_distance(const FieldState& a, const FieldState& b) {
  auto rel = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double n = y.norm();
    return (x - y).norm() / (n > 0 ? n : 1.0);
  };
  double d = rel(a.sigma, b.sigma);
  d = std::max(d, rel(a.u, b.u));
  d = std::max(d, rel(a.gamma, b.gamma));
  d = std::max(d, rel(a.z, b.z));
  d = std::max(d, rel(a.p, b.p));
  return d;
}

FieldState Stepper::step(const FieldState& prev, double t, double dt, StepDiagnostics* diag) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  RhsVectors rhs = step_rhs(prev, t, dt);
  switch (opts_.path) {
    case SolvePath::full:
      return solve_full(rhs, dt, t);
    case SolvePath::reduced:
      return solve_reduced_path(rhs, dt, t, diag);
    case SolvePath::both: {
      FieldState red = solve_reduced_path(rhs, dt, t, diag);
      FieldState ful = solve_full(rhs, dt, t);
      if (diag) diag->reduced_vs_full = state_distance(red, ful);
      return red;
    }
  }
  throw std::logic_error("step: unknown path");
}

namespace {

// Vertex-rule and Gauss functionals of continuous fields against the discrete
// test spaces; rows match the stationary five-field operator.
RhsVectors projection_rhs(const Mesh& mesh, const DofMaps& dofs, const MaterialModel& model,
                          const InitialFields& f) {
  RhsVectors r;
  r.b_sigma = Eigen::VectorXd::Zero(dofs.stress.n_dofs);
  r.b_u = Eigen::VectorXd::Zero(dofs.displacement.n_dofs);
  r.b_gamma = Eigen::VectorXd::Zero(dofs.rotation.n_dofs);
  r.b_z = Eigen::VectorXd::Zero(dofs.velocity.n_dofs);
  r.b_p = Eigen::VectorXd::Zero(dofs.pressure.n_dofs);

  const int s = mesh.corners();
  const CellType ct = mesh.cell_type;
  const QuadratureRule vr = vertex_rule(ct);
  const QuadratureRule gq = gauss_rule(ct, 5);
  const double alpha = model.alpha;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const ElementMap em = element_map(mesh, c);
    const auto& sdof = dofs.stress.cell_dofs[c];
    const auto& smul = dofs.stress.cell_coef[c];
    const auto& zdof = dofs.velocity.cell_dofs[c];
    const auto& zmul = dofs.velocity.cell_coef[c];

    // Q-form parts at the element vertices.
    for (int i = 0; i < s; ++i) {
      const Eigen::Vector2d xh = vr.points[i];
      const Eigen::Matrix2d DF = em.jacobian(xh);
      const double J = em.jac_det(xh);
      const double w = vr.weights[i] * J;
      const Eigen::Vector2d xp = em.map(xh);

      const double p0 = f.p(xp);
      const Eigen::Matrix2d sig0 = f.sigma(xp);
      const double rot0 = f.rotation(xp);
      const Eigen::Vector2d z0 = f.z(xp);
      const Eigen::Matrix2d Kinv = perm_inverse(model, xp);
      const Eigen::Matrix2d Asig =
          compliance_apply(model, sig0 + alpha * p0 * Eigen::Matrix2d::Identity(), xp);
      const Eigen::Matrix2d gamma0{{0, rot0}, {-rot0, 0}};

      const int jprev = 2 * ((i + s - 1) % s) + 1;
      const int jnext = 2 * i;
      for (int jloc : {jprev, jnext}) {
        const Eigen::Vector2d val = DF * bdm1_value(ct, jloc, xh) / J;
        // velocity row: (K^-1 z0, zeta)_Q
        r.b_z[zdof[jloc]] += w * zmul[jloc] * val.dot(Kinv * z0);
        for (int row = 0; row < 2; ++row) {
          Eigen::Matrix2d B = Eigen::Matrix2d::Zero();
          B.row(row) = val.transpose();
          const int loc = 2 * jloc + row;
          // stress row: (A(sigma0 + alpha p0 I), tau)_Q + (gamma0, tau)_Q
          r.b_sigma[sdof[loc]] +=
              w * smul[loc] * (Asig.cwiseProduct(B).sum() + gamma0.cwiseProduct(B).sum());
        }
      }
      // rotation row: -(sigma0, xi)_Q
      r.b_gamma[mesh.cells[c][i]] -= w * (sig0(0, 1) - sig0(1, 0));
      // pressure row Q-parts: alpha (A(sigma0), w I)_Q + alpha^2 (A p0 I, w I)_Q
      const Eigen::Matrix2d Asig_only = compliance_apply(model, sig0, xp);
      const double AI = compliance_apply(model, Eigen::Matrix2d::Identity(), xp).trace();
      r.b_p[c] += w * (alpha * Asig_only.trace() + alpha * alpha * p0 * AI);
    }

    // Exact-form parts by Gauss quadrature.
    double int_div_z = 0, int_p0 = 0;
    Eigen::Vector2d int_div_sigma = Eigen::Vector2d::Zero();
    for (size_t qi = 0; qi < gq.points.size(); ++qi) {
      const Eigen::Vector2d xh = gq.points[qi];
      const double wJ = gq.weights[qi] * em.jac_det(xh);
      const Eigen::Vector2d xp = em.map(xh);
      int_div_z += wJ * f.div_z(xp);
      int_p0 += wJ * f.p(xp);
      int_div_sigma += wJ * f.div_sigma(xp);
      // (u0, div tau) and -(p0, div zeta): div of a mapped basis times the
      // volume element reduces to the reference divergence.
      const Eigen::Vector2d u0 = f.u(xp);
      const double p0 = f.p(xp);
      for (int jv = 0; jv < 2 * s; ++jv) {
        const double d = bdm1_div(ct, jv) * gq.weights[qi];
        r.b_z[zdof[jv]] -= zmul[jv] * d * p0;
        for (int row = 0; row < 2; ++row) {
          const int loc = 2 * jv + row;
          r.b_sigma[sdof[loc]] += smul[loc] * d * u0[row];
        }
      }
    }
    // u row: -(div sigma0, v)
    r.b_u[2 * c] -= int_div_sigma.x();
    r.b_u[2 * c + 1] -= int_div_sigma.y();
    // p row: + (div z0, w) + c0 (p0, w)
    r.b_p[c] += int_div_z + model.c0 * int_p0;
  }
  return r;
}

}  // namespace

FieldState Stepper::initial_state(const InitialFields* fields) {
  FieldState s;
  s.time = 0;
  if (data_.zero_initial_state || fields == nullptr) {
    if (!data_.zero_initial_state)
      throw std::invalid_argument(
          "initial_state: continuous initial fields required unless the run starts from zero");
    s.sigma = Eigen::VectorXd::Zero(dofs_.stress.n_dofs);
    s.u = Eigen::VectorXd::Zero(dofs_.displacement.n_dofs);
    s.gamma = Eigen::VectorXd::Zero(dofs_.rotation.n_dofs);
    s.z = Eigen::VectorXd::Zero(dofs_.velocity.n_dofs);
    s.p = Eigen::VectorXd::Zero(dofs_.pressure.n_dofs);
    return s;
  }
  // Stationary system (the dt = 1 step matrix) applied to the continuous
  // initial fields on both sides.
  RhsVectors rhs = projection_rhs(*mesh_, dofs_, model_, *fields);
  return solve_full(rhs, 1.0, 0.0);
}

RunResult Stepper::run(const TimeGrid& grid, const InitialFields* fields) {
  RunResult out;
  out.states.push_back(initial_state(fields));
  for (int n = 1; n <= grid.steps(); ++n) {
    StepDiagnostics diag;
    diag.step = n;
    out.states.push_back(step(out.states.back(), grid.times[n], grid.dt(n), &diag));
    out.diagnostics.push_back(diag);
  }
  return out;
}

BalanceReport balance_residuals(const Stepper& stepper, const FieldState& prev,
                                const FieldState& cur, double t, double dt) {
  const BlockSystem& B = stepper.blocks();
  RhsVectors full = stepper.step_rhs(prev, t, dt);
  // Mass: sum over cells of the pressure-row residual (the w = 1 test).
  Eigen::VectorXd r_p =
      B.stress_pres * cur.sigma + dt * (B.vel_div * cur.z) + B.pres_mass * cur.p - full.b_p;
  const double mass_scale = full.b_p.lpNorm<1>() + (B.stress_pres * cur.sigma).lpNorm<1>() +
                            (B.pres_mass * cur.p).lpNorm<1>() +
                            dt * (B.vel_div * cur.z).lpNorm<1>();
  BalanceReport rep;
  rep.mass = std::abs(r_p.sum()) / std::max(1.0, mass_scale);
  // Momentum: cellwise residual of -(div sigma, v) = (f, v).
  Eigen::VectorXd r_u = B.stress_div * cur.sigma + full.b_u;
  rep.momentum = r_u.lpNorm<Eigen::Infinity>() /
                 std::max(1.0, full.b_u.lpNorm<Eigen::Infinity>() +
                                   (B.stress_div * cur.sigma).lpNorm<Eigen::Infinity>());
  return rep;
}

}  // namespace msmfe
