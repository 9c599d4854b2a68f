#include "msmfe/verify.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "msmfe/quadrature.hpp"

namespace msmfe {

namespace {

// Spatial parts and derivatives of the manufactured solution; the full fields
// carry a common factor e^t.
struct Example2Closures {
  static double u1(double x, double y) {
    return x * x * x * std::pow(y, 4) + x * x +
           std::sin((1 - x) * (1 - y)) * std::cos(1 - y);
  }
  static double u2(double x, double y) {
    return std::pow(1 - x, 4) * std::pow(1 - y, 3) + (1 - y) * (1 - y) +
           std::cos(x * y) * std::sin(x);
  }
  static double u1_x(double x, double y) {
    const double a = (1 - x) * (1 - y), b = 1 - y;
    return 3 * x * x * std::pow(y, 4) + 2 * x - b * std::cos(a) * std::cos(b);
  }
  static double u1_y(double x, double y) {
    const double a = (1 - x) * (1 - y), b = 1 - y;
    return 4 * x * x * x * y * y * y - (1 - x) * std::cos(a) * std::cos(b) +
           std::sin(a) * std::sin(b);
  }
  static double u2_x(double x, double y) {
    const double c = x * y;
    return -4 * std::pow(1 - x, 3) * std::pow(1 - y, 3) - y * std::sin(c) * std::sin(x) +
           std::cos(c) * std::cos(x);
  }
  static double u2_y(double x, double y) {
    const double c = x * y;
    return -3 * std::pow(1 - x, 4) * (1 - y) * (1 - y) - 2 * (1 - y) -
           x * std::sin(c) * std::sin(x);
  }
  static double u1_xx(double x, double y) {
    const double a = (1 - x) * (1 - y), b = 1 - y;
    return 6 * x * std::pow(y, 4) + 2 - b * b * std::sin(a) * std::cos(b);
  }
  static double u1_xy(double x, double y) {
    const double a = (1 - x) * (1 - y), b = 1 - y;
    return 12 * x * x * y * y * y + std::cos(a) * std::cos(b) -
           b * (1 - x) * std::sin(a) * std::cos(b) - b * std::cos(a) * std::sin(b);
  }
  static double u1_yy(double x, double y) {
    const double a = (1 - x) * (1 - y), b = 1 - y;
    return 12 * x * x * x * y * y - (1 - x) * (1 - x) * std::sin(a) * std::cos(b) -
           2 * (1 - x) * std::cos(a) * std::sin(b) - std::sin(a) * std::cos(b);
  }
  static double u2_xx(double x, double y) {
    const double c = x * y;
    return 12 * (1 - x) * (1 - x) * std::pow(1 - y, 3) - y * y * std::cos(c) * std::sin(x) -
           2 * y * std::sin(c) * std::cos(x) - std::cos(c) * std::sin(x);
  }
  static double u2_xy(double x, double y) {
    const double c = x * y;
    return 12 * std::pow(1 - x, 3) * (1 - y) * (1 - y) - std::sin(c) * std::sin(x) -
           x * y * std::cos(c) * std::sin(x) - x * std::sin(c) * std::cos(x);
  }
  static double u2_yy(double x, double y) {
    const double c = x * y;
    return 6 * std::pow(1 - x, 4) * (1 - y) + 2 - x * x * std::cos(c) * std::sin(x);
  }

  static double ps(double x, double y) { return std::sin(M_PI * x) * std::cos(M_PI * y) + 10; }
  static double ps_x(double x, double y) { return M_PI * std::cos(M_PI * x) * std::cos(M_PI * y); }
  static double ps_y(double x, double y) { return -M_PI * std::sin(M_PI * x) * std::sin(M_PI * y); }
  static double ps_xx(double x, double y) {
    return -M_PI * M_PI * std::sin(M_PI * x) * std::cos(M_PI * y);
  }
  static double ps_yy(double x, double y) { return ps_xx(x, y); }
  static double ps_xy(double x, double y) {
    return -M_PI * M_PI * std::cos(M_PI * x) * std::sin(M_PI * y);
  }

  static constexpr double nu = 0.2;
  static double E(double x, double y) {
    return std::sin(5 * M_PI * x) * std::sin(5 * M_PI * y) + 5;
  }
  static double E_x(double x, double y) {
    return 5 * M_PI * std::cos(5 * M_PI * x) * std::sin(5 * M_PI * y);
  }
  static double E_y(double x, double y) {
    return 5 * M_PI * std::sin(5 * M_PI * x) * std::cos(5 * M_PI * y);
  }
  static double mu(double x, double y) { return E(x, y) / (2 * (1 + nu)); }
  static double mu_x(double x, double y) { return E_x(x, y) / (2 * (1 + nu)); }
  static double mu_y(double x, double y) { return E_y(x, y) / (2 * (1 + nu)); }
  static constexpr double lam_of_E = nu / ((1 + nu) * (1 - 2 * nu));
  static double lam(double x, double y) { return lam_of_E * E(x, y); }
  static double lam_x(double x, double y) { return lam_of_E * E_x(x, y); }
  static double lam_y(double x, double y) { return lam_of_E * E_y(x, y); }

  // permeability and its derivatives
  static double K11(double x, double y) { return (x + 1) * (x + 1) + y * y; }
  static double K12(double x, double y) { return std::sin(x * y); }
  static double K22(double x, double y) { return (x + 1) * (x + 1); }
  static double K11_x(double x, double /*y*/) { return 2 * (x + 1); }
  static double K12_x(double x, double y) { return y * std::cos(x * y); }
  static double K12_y(double x, double y) { return x * std::cos(x * y); }
  static double K22_y(double /*x*/, double /*y*/) { return 0; }
};

ManufacturedProblem make_mms(CellType cell_type) {
  using C = Example2Closures;
  constexpr double alpha = 1.0;
  constexpr double c0 = 1e-5;

  ManufacturedProblem mp;
  mp.cell_type = cell_type;
  mp.model = material_preset("example2");
  mp.T = 1e-3;
  mp.dt = 1e-4;

  mp.p = [](const Eigen::Vector2d& x, double t) { return std::exp(t) * C::ps(x.x(), x.y()); };
  mp.u = [](const Eigen::Vector2d& v, double t) {
    return Eigen::Vector2d(std::exp(t) * C::u1(v.x(), v.y()), std::exp(t) * C::u2(v.x(), v.y()));
  };
  mp.rotation = [](const Eigen::Vector2d& v, double t) {
    return 0.5 * std::exp(t) * (C::u1_y(v.x(), v.y()) - C::u2_x(v.x(), v.y()));
  };
  mp.sigma = [](const Eigen::Vector2d& v, double t) {
    const double x = v.x(), y = v.y(), et = std::exp(t);
    const double mu = C::mu(x, y), lam = C::lam(x, y);
    const double divu = C::u1_x(x, y) + C::u2_y(x, y);
    Eigen::Matrix2d s;
    s(0, 0) = 2 * mu * C::u1_x(x, y) + lam * divu - alpha * C::ps(x, y);
    s(1, 1) = 2 * mu * C::u2_y(x, y) + lam * divu - alpha * C::ps(x, y);
    s(0, 1) = s(1, 0) = mu * (C::u1_y(x, y) + C::u2_x(x, y));
    return Eigen::Matrix2d(et * s);
  };
  mp.z = [](const Eigen::Vector2d& v, double t) {
    const double x = v.x(), y = v.y(), et = std::exp(t);
    const double px = C::ps_x(x, y), py = C::ps_y(x, y);
    return Eigen::Vector2d(-et * (C::K11(x, y) * px + C::K12(x, y) * py),
                           -et * (C::K12(x, y) * px + C::K22(x, y) * py));
  };
  mp.f = [](const Eigen::Vector2d& v, double t) {
    const double x = v.x(), y = v.y(), et = std::exp(t);
    const double mu = C::mu(x, y), mux = C::mu_x(x, y), muy = C::mu_y(x, y);
    const double lam = C::lam(x, y), lamx = C::lam_x(x, y), lamy = C::lam_y(x, y);
    const double divu = C::u1_x(x, y) + C::u2_y(x, y);
    const double divu_x = C::u1_xx(x, y) + C::u2_xy(x, y);
    const double divu_y = C::u1_xy(x, y) + C::u2_yy(x, y);
    const double s11_x = 2 * mux * C::u1_x(x, y) + 2 * mu * C::u1_xx(x, y) + lamx * divu +
                         lam * divu_x - alpha * C::ps_x(x, y);
    const double s12_y = muy * (C::u1_y(x, y) + C::u2_x(x, y)) +
                         mu * (C::u1_yy(x, y) + C::u2_xy(x, y));
    const double s21_x = mux * (C::u1_y(x, y) + C::u2_x(x, y)) +
                         mu * (C::u1_xy(x, y) + C::u2_xx(x, y));
    const double s22_y = 2 * muy * C::u2_y(x, y) + 2 * mu * C::u2_yy(x, y) + lamy * divu +
                         lam * divu_y - alpha * C::ps_y(x, y);
    return Eigen::Vector2d(-et * (s11_x + s12_y), -et * (s21_x + s22_y));
  };
  mp.div_z = [](const Eigen::Vector2d& v, double t) {
    const double x = v.x(), y = v.y(), et = std::exp(t);
    const double px = C::ps_x(x, y), py = C::ps_y(x, y);
    const double pxx = C::ps_xx(x, y), pyy = C::ps_yy(x, y), pxy = C::ps_xy(x, y);
    const double dzx = -(C::K11_x(x, y) * px + C::K11(x, y) * pxx + C::K12_x(x, y) * py +
                         C::K12(x, y) * pxy);
    const double dzy = -(C::K12_y(x, y) * px + C::K12(x, y) * pxy + C::K22_y(x, y) * py +
                         C::K22(x, y) * pyy);
    return et * (dzx + dzy);
  };
  const ScalarField div_z = mp.div_z;
  mp.q = [div_z](const Eigen::Vector2d& v, double t) {
    const double x = v.x(), y = v.y(), et = std::exp(t);
    const double divu = C::u1_x(x, y) + C::u2_y(x, y);
    // time derivative of (c0 p + alpha div u) reproduces the fields themselves
    return c0 * et * C::ps(x, y) + alpha * et * divu + div_z(v, t);
  };

  SourceData data;
  data.body_force = mp.f;
  data.fluid_source = mp.q;
  for (const char* tag : {"left", "right", "bottom", "top"}) {
    data.dirichlet_displacement[tag] = mp.u;
    data.dirichlet_pressure[tag] = mp.p;
  }
  data.initial_pressure = mp.p;
  mp.data = data;

  if (cell_type == CellType::quadrilateral) {
    mp.mesh_for_level = [](int level) {
      Mesh m = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, CellType::quadrilateral));
      for (int l = 0; l <= level; ++l) m = refine_uniform(m);
      return m;
    };
    mp.h_for_level = [](int level) { return 1.0 / (8 << level); };
  } else {
    mp.mesh_for_level = [](int level) {
      return build_rectangle_mesh({0, 0, 1, 1}, 8 << level, 8 << level, CellType::triangle);
    };
    mp.h_for_level = [](int level) { return 1.0 / (8 << level); };
  }
  return mp;
}

}  // namespace

InitialFields ManufacturedProblem::initial_fields() const {
  InitialFields f0;
  f0.sigma = [this](const Eigen::Vector2d& x) { return sigma(x, 0.0); };
  f0.u = [this](const Eigen::Vector2d& x) { return u(x, 0.0); };
  f0.rotation = [this](const Eigen::Vector2d& x) { return rotation(x, 0.0); };
  f0.z = [this](const Eigen::Vector2d& x) { return z(x, 0.0); };
  f0.p = [this](const Eigen::Vector2d& x) { return p(x, 0.0); };
  f0.div_sigma = [this](const Eigen::Vector2d& x) { return Eigen::Vector2d(-f(x, 0.0)); };
  f0.div_z = [this](const Eigen::Vector2d& x) { return div_z(x, 0.0); };
  return f0;
}

ManufacturedProblem make_example2() { return make_mms(CellType::quadrilateral); }
ManufacturedProblem make_simplicial_mms() { return make_mms(CellType::triangle); }

const char* to_string(ErrField f) {
  switch (f) {
    case ErrField::sigma: return "sigma";
    case ErrField::div_sigma: return "div_sigma";
    case ErrField::u: return "u";
    case ErrField::gamma: return "gamma";
    case ErrField::z: return "z";
    case ErrField::div_z: return "div_z";
    case ErrField::p: return "p";
  }
  return "?";
}

const char* to_string(ErrNorm n) { return n == ErrNorm::l2 ? "l2L2" : "linfL2"; }

namespace {

struct SpatialSquares {
  std::array<double, kNumErrFields> err{};
  std::array<double, kNumErrFields> exact{};
};

// Deterministic pairwise reduction over the per-cell array (fixed cell order,
// independent of thread count).
SpatialSquares pairwise_reduce(const std::vector<SpatialSquares>& v, size_t lo, size_t hi) {
  if (hi - lo == 1) return v[lo];
  const size_t mid = lo + (hi - lo) / 2;
  SpatialSquares a = pairwise_reduce(v, lo, mid);
  SpatialSquares b = pairwise_reduce(v, mid, hi);
  for (int i = 0; i < kNumErrFields; ++i) {
    a.err[i] += b.err[i];
    a.exact[i] += b.exact[i];
  }
  return a;
}

SpatialSquares cell_squares(const ManufacturedProblem& mp, const FieldState& state,
                            const Mesh& mesh, const DofMaps& dofs, const QuadratureRule& gq,
                            int c, double t) {
  SpatialSquares out;
  const int s = mesh.corners();
  const CellType ct = mesh.cell_type;
  const ElementMap em = element_map(mesh, c);
  const auto& sdof = dofs.stress.cell_dofs[c];
  const auto& smul = dofs.stress.cell_coef[c];
  const auto& zdof = dofs.velocity.cell_dofs[c];
  const auto& zmul = dofs.velocity.cell_coef[c];

  const Eigen::Vector2d uh(state.u[2 * c], state.u[2 * c + 1]);
  const double ph = state.p[c];

  for (size_t qi = 0; qi < gq.points.size(); ++qi) {
    const Eigen::Vector2d xh = gq.points[qi];
    const Eigen::Matrix2d DF = em.jacobian(xh);
    const double J = em.jac_det(xh);
    const double w = gq.weights[qi] * J;
    const Eigen::Vector2d xp = em.map(xh);

    Eigen::Matrix2d sig_h = Eigen::Matrix2d::Zero();
    Eigen::Vector2d dsig_h = Eigen::Vector2d::Zero();
    Eigen::Vector2d z_h = Eigen::Vector2d::Zero();
    double dz_h = 0;
    for (int jv = 0; jv < 2 * s; ++jv) {
      const Eigen::Vector2d val = DF * bdm1_value(ct, jv, xh) / J;
      const double dv = bdm1_div(ct, jv) / J;
      z_h += state.z[zdof[jv]] * zmul[jv] * val;
      dz_h += state.z[zdof[jv]] * zmul[jv] * dv;
      for (int row = 0; row < 2; ++row) {
        const int loc = 2 * jv + row;
        const double coef = state.sigma[sdof[loc]] * smul[loc];
        sig_h.row(row) += coef * val.transpose();
        dsig_h[row] += coef * dv;
      }
    }
    double rot_h = 0;
    for (int i = 0; i < s; ++i)
      rot_h += state.gamma[mesh.cells[c][i]] * rotation_value(ct, i, xh);

    const Eigen::Matrix2d sig_e = mp.sigma(xp, t);
    const Eigen::Vector2d dsig_e = -mp.f(xp, t);
    const Eigen::Vector2d u_e = mp.u(xp, t);
    const double rot_e = mp.rotation(xp, t);
    const Eigen::Vector2d z_e = mp.z(xp, t);
    const double dz_e = mp.div_z(xp, t);
    const double p_e = mp.p(xp, t);

    out.err[int(ErrField::sigma)] += w * (sig_e - sig_h).squaredNorm();
    out.exact[int(ErrField::sigma)] += w * sig_e.squaredNorm();
    out.err[int(ErrField::div_sigma)] += w * (dsig_e - dsig_h).squaredNorm();
    out.exact[int(ErrField::div_sigma)] += w * dsig_e.squaredNorm();
    out.err[int(ErrField::u)] += w * (u_e - uh).squaredNorm();
    out.exact[int(ErrField::u)] += w * u_e.squaredNorm();
    // full skew tensor Frobenius norm: ||gamma||_F^2 = 2 r^2
    out.err[int(ErrField::gamma)] += w * 2 * (rot_e - rot_h) * (rot_e - rot_h);
    out.exact[int(ErrField::gamma)] += w * 2 * rot_e * rot_e;
    out.err[int(ErrField::z)] += w * (z_e - z_h).squaredNorm();
    out.exact[int(ErrField::z)] += w * z_e.squaredNorm();
    out.err[int(ErrField::div_z)] += w * (dz_e - dz_h) * (dz_e - dz_h);
    out.exact[int(ErrField::div_z)] += w * dz_e * dz_e;
    out.err[int(ErrField::p)] += w * (p_e - ph) * (p_e - ph);
    out.exact[int(ErrField::p)] += w * p_e * p_e;
  }
  return out;
}

SpatialSquares spatial_squares(const ManufacturedProblem& mp, const FieldState& state,
                               const Mesh& mesh, const DofMaps& dofs, ExecPolicy policy) {
  const QuadratureRule gq = gauss_rule(mesh.cell_type, 5);
  std::vector<SpatialSquares> per_cell(mesh.n_cells());
  if (policy == ExecPolicy::serial) {
    for (int c = 0; c < mesh.n_cells(); ++c)
      per_cell[c] = cell_squares(mp, state, mesh, dofs, gq, c, state.time);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (int c = 0; c < mesh.n_cells(); ++c)
      per_cell[c] = cell_squares(mp, state, mesh, dofs, gq, c, state.time);
  }
  return pairwise_reduce(per_cell, 0, per_cell.size());
}

}  // namespace

ErrorReport compute_errors(const ManufacturedProblem& problem, const std::vector<FieldState>& states,
                           const TimeGrid& grid, const Mesh& mesh, const DofMaps& dofs,
                           ExecPolicy policy) {
  if (states.size() != grid.times.size())
    throw std::invalid_argument("compute_errors: trajectory must cover the time grid");
  ErrorReport rep;
  std::array<double, kNumErrFields> l2_err{}, l2_exact{};
  std::array<double, kNumErrFields> linf_err{}, linf_exact{};

  for (size_t n = 0; n < states.size(); ++n) {
    const SpatialSquares sq = spatial_squares(problem, states[n], mesh, dofs, policy);
    for (int i = 0; i < kNumErrFields; ++i) {
      linf_err[i] = std::max(linf_err[i], sq.err[i]);
      linf_exact[i] = std::max(linf_exact[i], sq.exact[i]);
      if (n >= 1) {
        l2_err[i] += grid.dt(static_cast<int>(n)) * sq.err[i];
        l2_exact[i] += grid.dt(static_cast<int>(n)) * sq.exact[i];
      }
    }
  }
  for (int i = 0; i < kNumErrFields; ++i) {
    rep.absolute[i][int(ErrNorm::l2)] = std::sqrt(l2_err[i]);
    rep.exact_norm[i][int(ErrNorm::l2)] = std::sqrt(l2_exact[i]);
    rep.absolute[i][int(ErrNorm::linf)] = std::sqrt(linf_err[i]);
    rep.exact_norm[i][int(ErrNorm::linf)] = std::sqrt(linf_exact[i]);
  }
  return rep;
}

double ConvergenceTable::min_rate() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (!std::isnan(r.rate)) m = std::min(m, r.rate);
  return m;
}

double ConvergenceTable::min_rate(const std::string& field) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.field == field && !std::isnan(r.rate)) m = std::min(m, r.rate);
  return m;
}

void ConvergenceTable::write_csv(std::ostream& out) const {
  out << "h,field,norm,error,rate\n";
  char buf[128];
  for (const auto& r : rows) {
    if (std::isnan(r.rate))
      std::snprintf(buf, sizeof buf, "%.10g,%s,%s,%.12e,\n", r.h, r.field.c_str(), r.norm.c_str(),
                    r.error);
    else
      std::snprintf(buf, sizeof buf, "%.10g,%s,%s,%.12e,%.3f\n", r.h, r.field.c_str(),
                    r.norm.c_str(), r.error, r.rate);
    out << buf;
  }
}

std::vector<double> rates_from_errors(const std::vector<double>& errors) {
  std::vector<double> rates;
  for (size_t i = 1; i < errors.size(); ++i) rates.push_back(std::log2(errors[i - 1] / errors[i]));
  return rates;
}

ConvergenceTable convergence_study(const ManufacturedProblem& problem, int levels,
                                   StepperOptions opts, double* reduced_vs_full) {
  if (levels < 1) throw std::invalid_argument("convergence_study: levels must be >= 1");
  ConvergenceTable table;
  const TimeGrid grid = TimeGrid::uniform(problem.T, problem.dt);
  if (reduced_vs_full) *reduced_vs_full = 0;

  // The norms tabulated by the convergence harness: every field in l2(L2),
  // the five primary fields also in linf(L2).
  const std::vector<std::pair<ErrField, ErrNorm>> tabulated = {
      {ErrField::sigma, ErrNorm::l2},    {ErrField::div_sigma, ErrNorm::l2},
      {ErrField::u, ErrNorm::l2},        {ErrField::gamma, ErrNorm::l2},
      {ErrField::z, ErrNorm::l2},        {ErrField::div_z, ErrNorm::l2},
      {ErrField::p, ErrNorm::l2},        {ErrField::sigma, ErrNorm::linf},
      {ErrField::u, ErrNorm::linf},      {ErrField::gamma, ErrNorm::linf},
      {ErrField::z, ErrNorm::linf},      {ErrField::p, ErrNorm::linf}};

  for (int level = 0; level < levels; ++level) {
    const Mesh mesh = problem.mesh_for_level(level);
    Stepper stepper(mesh, problem.model, problem.data, opts);
    const InitialFields f0 = problem.initial_fields();
    RunResult run = stepper.run(grid, &f0);
    if (reduced_vs_full)
      for (const auto& d : run.diagnostics)
        *reduced_vs_full = std::max(*reduced_vs_full, d.reduced_vs_full);
    ErrorReport rep =
        compute_errors(problem, run.states, grid, mesh, stepper.dofs(), opts.exec);
    rep.h = problem.h_for_level(level);
    table.reports.push_back(rep);
  }

  for (size_t l = 0; l < table.reports.size(); ++l)
    for (const auto& [field, norm] : tabulated) {
      ConvergenceRow row;
      row.h = table.reports[l].h;
      row.field = to_string(field);
      row.norm = to_string(norm);
      row.error = table.reports[l].get(field, norm);
      row.rate = std::numeric_limits<double>::quiet_NaN();
      if (l > 0) {
        const double prev = table.reports[l - 1].get(field, norm);
        if (prev > 0 && row.error > 0) row.rate = std::log2(prev / row.error);
      }
      table.rows.push_back(row);
    }
  return table;
}

CheckerboardReport checkerboard_indicator(const Eigen::VectorXd& p, const Mesh& mesh) {
  if (p.size() != mesh.n_cells())
    throw std::invalid_argument("checkerboard_indicator: cellwise field required");
  CheckerboardReport rep;
  const double range = p.size() ? p.maxCoeff() - p.minCoeff() : 0.0;
  if (range <= 0) return rep;

  std::vector<std::vector<int>> neighbors(mesh.n_cells());
  int n_interior = 0;
  double jump_sum = 0;
  for (const auto& e : mesh.edges) {
    if (e.boundary()) continue;
    neighbors[e.cell_lo].push_back(e.cell_hi);
    neighbors[e.cell_hi].push_back(e.cell_lo);
    jump_sum += std::abs(p[e.cell_lo] - p[e.cell_hi]);
    ++n_interior;
  }
  const double threshold = 1e-8 * range;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (neighbors[c].empty()) continue;
    int sign = 0;
    bool strict = true;
    for (int nb : neighbors[c]) {
      const double d = p[c] - p[nb];
      if (std::abs(d) <= threshold) {
        strict = false;
        break;
      }
      const int sd = d > 0 ? 1 : -1;
      if (sign == 0) sign = sd;
      if (sd != sign) {
        strict = false;
        break;
      }
    }
    if (strict) ++rep.strict_cells;
  }
  if (n_interior > 0) rep.oscillation_ratio = jump_sum / (range * n_interior);
  return rep;
}

}  // namespace msmfe
