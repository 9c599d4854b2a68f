#include "msmfe/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "msmfe/quadrature.hpp"

namespace msmfe {

namespace {

using Triplet = Eigen::Triplet<double>;

// All vertex-rule and exact-divergence contributions of one cell.
struct CellContribution {
  std::vector<Triplet> ss, sg, sp, zz;
  std::vector<Triplet> ds, dz;  // exact divergence couplings
  double pp_compliance = 0;     // alpha^2 (A I, I)_Q on this cell
  double area = 0;
};

CellContribution cell_contribution(const Mesh& mesh, const DofMaps& dofs,
                                   const MaterialModel& model, int c) {
  CellContribution out;
  const int s = mesh.corners();
  const CellType ct = mesh.cell_type;
  const ElementMap em = element_map(mesh, c);
  const QuadratureRule vr = vertex_rule(ct);
  const double alpha = model.alpha;

  const auto& sdof = dofs.stress.cell_dofs[c];
  const auto& smul = dofs.stress.cell_coef[c];
  const auto& zdof = dofs.velocity.cell_dofs[c];
  const auto& zmul = dofs.velocity.cell_coef[c];

  out.area = em.area();

  for (int i = 0; i < s; ++i) {
    const Eigen::Vector2d xh = vr.points[i];
    const Eigen::Matrix2d DF = em.jacobian(xh);
    const double J = em.jac_det(xh);
    if (!(J > 0)) throw std::runtime_error("assemble_blocks: non-positive Jacobian");
    const double w = vr.weights[i] * J;
    const Eigen::Vector2d xp = em.map(xh);

    // The two local BDM1 functions supported at this corner; all others
    // vanish there as full vectors.
    const int jprev = 2 * ((i + s - 1) % s) + 1;  // incoming edge, second endpoint
    const int jnext = 2 * i;                      // outgoing edge, first endpoint
    const int jloc[2] = {jprev, jnext};
    Eigen::Vector2d val[2];
    for (int a = 0; a < 2; ++a) val[a] = DF * bdm1_value(ct, jloc[a], xh) / J;

    // velocity mass (K^-1 z, zeta)_Q
    const Eigen::Matrix2d Kinv = perm_inverse(model, xp);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double m = w * zmul[jloc[a]] * zmul[jloc[b]] * val[a].dot(Kinv * val[b]);
        out.zz.emplace_back(zdof[jloc[a]], zdof[jloc[b]], m);
      }

    // stress forms: basis matrices have one nonzero row each
    Eigen::Matrix2d B[4], AB[4];
    int gdof[4];
    double gmul[4];
    for (int a = 0; a < 2; ++a)
      for (int row = 0; row < 2; ++row) {
        const int q = 2 * a + row;
        B[q].setZero();
        B[q].row(row) = val[a].transpose();
        AB[q] = compliance_apply(model, B[q], xp);
        gdof[q] = sdof[2 * jloc[a] + row];
        gmul[q] = smul[2 * jloc[a] + row];
      }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b)
        out.ss.emplace_back(gdof[a], gdof[b],
                            w * gmul[a] * gmul[b] * AB[a].cwiseProduct(B[b]).sum());
      // (sigma, xi)_Q against the skew basis [[0,1],[-1,0]] of this vertex
      out.sg.emplace_back(mesh.cells[c][i], gdof[a], w * gmul[a] * (B[a](0, 1) - B[a](1, 0)));
      // alpha (A sigma, w I)_Q against the cell indicator
      out.sp.emplace_back(c, gdof[a], w * gmul[a] * alpha * AB[a].trace());
    }

    // alpha^2 (A p I, w I)_Q
    out.pp_compliance +=
        w * alpha * alpha * compliance_apply(model, Eigen::Matrix2d::Identity(), xp).trace();
  }

  // Exact divergence couplings: div of a mapped basis is (1/J) div-hat, and
  // the J in the volume element cancels, so each entry is div-hat * |E-hat|.
  const double ref_area = reference_area(ct);
  for (int jv = 0; jv < 2 * s; ++jv) {
    const double d = bdm1_div(ct, jv) * ref_area;
    out.dz.emplace_back(c, zdof[jv], zmul[jv] * d);
    for (int row = 0; row < 2; ++row)
      out.ds.emplace_back(2 * c + row, sdof[2 * jv + row], smul[2 * jv + row] * d);
  }
  return out;
}

void scatter(const CellContribution& cc, const MaterialModel& model, int c,
             std::vector<Triplet>& ss, std::vector<Triplet>& sg, std::vector<Triplet>& sp,
             std::vector<Triplet>& zz, std::vector<Triplet>& ds, std::vector<Triplet>& dz,
             std::vector<Triplet>& pp) {
  ss.insert(ss.end(), cc.ss.begin(), cc.ss.end());
  sg.insert(sg.end(), cc.sg.begin(), cc.sg.end());
  sp.insert(sp.end(), cc.sp.begin(), cc.sp.end());
  zz.insert(zz.end(), cc.zz.begin(), cc.zz.end());
  ds.insert(ds.end(), cc.ds.begin(), cc.ds.end());
  dz.insert(dz.end(), cc.dz.begin(), cc.dz.end());
  pp.emplace_back(c, c, model.c0 * cc.area + cc.pp_compliance);
}

}  // namespace

BlockSystem assemble_blocks(const Mesh& mesh, const DofMaps& dofs, const MaterialModel& model,
                            ExecPolicy policy) {
  const int nc = mesh.n_cells();
  std::vector<Triplet> ss, sg, sp, zz, ds, dz, pp;

  if (policy == ExecPolicy::serial) {
    for (int c = 0; c < nc; ++c) {
      CellContribution cc = cell_contribution(mesh, dofs, model, c);
      scatter(cc, model, c, ss, sg, sp, zz, ds, dz, pp);
    }
  } else {
    // Two-phase: per-cell contributions in parallel, then a deterministic
    // merge in cell order (identical addition order to the serial path).
    std::vector<CellContribution> per_cell(nc);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (int c = 0; c < nc; ++c) per_cell[c] = cell_contribution(mesh, dofs, model, c);
    for (int c = 0; c < nc; ++c) scatter(per_cell[c], model, c, ss, sg, sp, zz, ds, dz, pp);
  }

  BlockSystem B;
  const int ns = dofs.stress.n_dofs, nz = dofs.velocity.n_dofs;
  const int nu = dofs.displacement.n_dofs, np = dofs.pressure.n_dofs;
  const int ng = dofs.rotation.n_dofs;
  auto build = [](SpMat& A, int rows, int cols, std::vector<Triplet>& t) {
    A.resize(rows, cols);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
  };
  build(B.stress_mass, ns, ns, ss);
  build(B.stress_div, nu, ns, ds);
  build(B.stress_rot, ng, ns, sg);
  build(B.stress_pres, np, ns, sp);
  build(B.vel_mass, nz, nz, zz);
  build(B.vel_div, np, nz, dz);
  build(B.pres_mass, np, np, pp);
  return B;
}

namespace {

// Integral of f(x, t) against each hat function (both endpoint slots) of a
// boundary edge; quadrilaterals project f to its edge mean first.
template <typename F>
std::array<double, 2> edge_hat_integrals(const Mesh& mesh, int e, const F& f, bool project_mean) {
  const Eigen::Vector2d a = mesh.nodes[mesh.edges[e].v0];
  const Eigen::Vector2d b = mesh.nodes[mesh.edges[e].v1];
  const double len = (b - a).norm();
  std::vector<double> x, w;
  gauss_legendre_01(5, x, w);
  if (project_mean) {
    double m = 0;
    for (size_t i = 0; i < x.size(); ++i) m += w[i] * f(a + x[i] * (b - a));
    return {m * len / 2, m * len / 2};
  }
  std::array<double, 2> out = {0, 0};
  for (size_t i = 0; i < x.size(); ++i) {
    const double fv = f(a + x[i] * (b - a));
    out[0] += w[i] * fv * (1 - x[i]) * len;
    out[1] += w[i] * fv * x[i] * len;
  }
  return out;
}

}  // namespace

RhsVectors assemble_rhs(const Mesh& mesh, const DofMaps& dofs, const SourceData& data, double t,
                        double dt) {
  if (!(dt > 0)) throw std::invalid_argument("assemble_rhs: dt must be positive");
  RhsVectors r;
  r.b_sigma = Eigen::VectorXd::Zero(dofs.stress.n_dofs);
  r.b_u = Eigen::VectorXd::Zero(dofs.displacement.n_dofs);
  r.b_gamma = Eigen::VectorXd::Zero(dofs.rotation.n_dofs);
  r.b_z = Eigen::VectorXd::Zero(dofs.velocity.n_dofs);
  r.b_p = Eigen::VectorXd::Zero(dofs.pressure.n_dofs);

  const QuadratureRule gq = gauss_rule(mesh.cell_type, 5);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const ElementMap em = element_map(mesh, c);
    double fx = 0, fy = 0, q = 0;
    for (size_t i = 0; i < gq.points.size(); ++i) {
      const double wJ = gq.weights[i] * em.jac_det(gq.points[i]);
      const Eigen::Vector2d xp = em.map(gq.points[i]);
      const Eigen::Vector2d f = data.body_force(xp, t);
      fx += wJ * f.x();
      fy += wJ * f.y();
      q += wJ * data.fluid_source(xp, t);
    }
    r.b_u[2 * c] = fx;
    r.b_u[2 * c + 1] = fy;
    r.b_p[c] = dt * q;
  }

  const bool project = (mesh.cell_type == CellType::quadrilateral);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (!mesh.edges[e].boundary()) continue;
    const std::string& tag = mesh.edge_tag[e];
    if (auto it = data.dirichlet_displacement.find(tag); it != data.dirichlet_displacement.end()) {
      for (int row = 0; row < 2; ++row) {
        auto g = [&](const Eigen::Vector2d& x) { return it->second(x, t)[row]; };
        const auto v = edge_hat_integrals(mesh, e, g, project);
        r.b_sigma[4 * e + 0 + row] += v[0];
        r.b_sigma[4 * e + 2 + row] += v[1];
      }
    }
    if (auto it = data.dirichlet_pressure.find(tag); it != data.dirichlet_pressure.end()) {
      auto g = [&](const Eigen::Vector2d& x) { return it->second(x, t); };
      const auto v = edge_hat_integrals(mesh, e, g, project);
      r.b_z[2 * e + 0] -= v[0];
      r.b_z[2 * e + 1] -= v[1];
    }
  }
  return r;
}

ConstraintSet essential_constraints(const Mesh& mesh, const DofMaps& dofs, const SourceData& data,
                                    double t) {
  ConstraintSet cs;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (!mesh.edges[e].boundary()) continue;
    const std::string& tag = mesh.edge_tag[e];
    if (auto it = data.traction.find(tag); it != data.traction.end()) {
      auto g = [&](const Eigen::Vector2d& x) { return it->second(x, t); };
      const auto v = interpolate_boundary_traction(mesh, e, g, BoundaryMode::pointwise);
      for (int i = 0; i < 4; ++i) cs.stress.push_back({4 * e + i, v[i]});
    }
    if (auto it = data.normal_flux.find(tag); it != data.normal_flux.end()) {
      auto g = [&](const Eigen::Vector2d& x) { return it->second(x, t); };
      const auto v = interpolate_boundary_normal(mesh, e, g, BoundaryMode::pointwise);
      cs.velocity.push_back({2 * e + 0, v[0]});
      cs.velocity.push_back({2 * e + 1, v[1]});
    }
  }
  // Rotations at vertices whose stress dofs are all constrained are decoupled.
  std::vector<char> fixed(dofs.stress.n_dofs, 0);
  for (const auto& c : cs.stress) fixed[c.dof] = 1;
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    const auto& group = dofs.stress.vertex_groups[v];
    if (group.empty()) continue;
    bool all = true;
    for (int d : group) all = all && fixed[d];
    if (all) cs.rotation_fixed.push_back(v);
  }
  return cs;
}

void apply_essential_bc(SpMat& A, Eigen::VectorXd& rhs, const std::vector<Constraint>& constraints) {
  std::map<int, double> fixed;
  for (const auto& c : constraints) {
    auto [it, inserted] = fixed.emplace(c.dof, c.value);
    if (!inserted && it->second != c.value)
      throw std::runtime_error("apply_essential_bc: conflicting duplicate constraints on dof " +
                               std::to_string(c.dof));
  }
  if (fixed.empty()) return;

  // Move columns to the right-hand side.
  for (const auto& [dof, value] : fixed)
    for (SpMat::InnerIterator it(A, dof); it; ++it)
      if (!fixed.count(it.row())) rhs[it.row()] -= it.value() * value;

  // Zero constrained rows and columns, set unit diagonal.
  for (int col = 0; col < A.outerSize(); ++col) {
    const bool col_fixed = fixed.count(col) > 0;
    for (SpMat::InnerIterator it(A, col); it; ++it)
      if (col_fixed || fixed.count(it.row())) it.valueRef() = 0.0;
  }
  std::vector<Triplet> diag;
  for (const auto& [dof, value] : fixed) diag.emplace_back(dof, dof, 1.0);
  SpMat D(A.rows(), A.cols());
  D.setFromTriplets(diag.begin(), diag.end());
  A += D;
  A.prune([](int, int, double v) { return v != 0.0; });
  A.makeCompressed();
  for (const auto& [dof, value] : fixed) rhs[dof] = value;
}

void dump_triplets(const SpMat& A, std::ostream& out) {
  char buf[96];
  for (int col = 0; col < A.outerSize(); ++col)
    for (SpMat::InnerIterator it(A, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", long(it.row()), long(it.col()), it.value());
      out << buf;
    }
}

bool sparsity_within_vertex_groups(const SpMat& A, const std::vector<std::vector<int>>& groups) {
  std::vector<int> vertex_of(A.rows(), -1);
  for (size_t v = 0; v < groups.size(); ++v)
    for (int d : groups[v]) vertex_of[d] = static_cast<int>(v);
  for (int col = 0; col < A.outerSize(); ++col)
    for (SpMat::InnerIterator it(A, col); it; ++it)
      if (it.value() != 0.0 && vertex_of[it.row()] != vertex_of[it.col()]) return false;
  return true;
}

}  // namespace msmfe
