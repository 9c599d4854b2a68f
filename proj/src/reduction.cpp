#include "msmfe/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msmfe {

namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<char> fixed_mask(int n, const std::vector<Constraint>& cs) {
  std::vector<char> mask(n, 0);
  for (const auto& c : cs) mask[c.dof] = 1;
  return mask;
}

// Dense copy of the columns `cols` of A restricted to rows `rows` (both sorted).
Eigen::MatrixXd dense_block(const SpMat& A, const std::vector<int>& rows,
                            const std::vector<int>& cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows.size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j)
    for (SpMat::InnerIterator it(A, cols[j]); it; ++it) {
      auto pos = std::lower_bound(rows.begin(), rows.end(), it.row());
      if (pos != rows.end() && *pos == it.row()) out(pos - rows.begin(), j) = it.value();
    }
  return out;
}

// Row index set of the given columns of A (sorted, unique).
std::vector<int> coupled_rows(const SpMat& A, const std::vector<int>& cols) {
  std::vector<int> rows;
  for (int c : cols)
    for (SpMat::InnerIterator it(A, c); it; ++it) rows.push_back(it.row());
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

LocalVertexSystem make_local(const BlockSystem& blocks, const Mesh& mesh, const DofMaps& dofs,
                             const std::vector<char>& sfixed, const std::vector<char>& zfixed,
                             const std::vector<char>& rot_fixed, int v) {
  LocalVertexSystem L;
  L.vertex = v;
  for (int d : dofs.stress.vertex_groups[v])
    if (!sfixed[d]) L.stress_dofs.push_back(d);
  for (int d : dofs.velocity.vertex_groups[v])
    if (!zfixed[d]) L.velocity_dofs.push_back(d);
  L.k = static_cast<int>(L.velocity_dofs.size());
  L.rotation_fixed = rot_fixed[v] != 0;

  L.S = dense_block(blocks.stress_mass, L.stress_dofs, L.stress_dofs);
  L.Z = dense_block(blocks.vel_mass, L.velocity_dofs, L.velocity_dofs);
  if (!L.stress_dofs.empty()) {
    L.S_fac.compute(L.S);
    if (L.S_fac.info() != Eigen::Success || !L.S_fac.isPositive())
      throw std::runtime_error("build_local_systems: singular stress block at vertex " +
                               std::to_string(v));
    L.u_rows = coupled_rows(blocks.stress_div, L.stress_dofs);
    L.p_rows = coupled_rows(blocks.stress_pres, L.stress_dofs);
    L.U = dense_block(blocks.stress_div, L.u_rows, L.stress_dofs);
    L.P = dense_block(blocks.stress_pres, L.p_rows, L.stress_dofs);
    L.G = dense_block(blocks.stress_rot, {v}, L.stress_dofs).row(0);
    if (!L.rotation_fixed) {
      L.gamma_schur = L.G * L.S_fac.solve(L.G.transpose());
      if (!(L.gamma_schur > 0))
        throw std::runtime_error("eliminate: singular rotation Schur block at vertex " +
                                 std::to_string(v));
    }
  } else if (!L.rotation_fixed) {
    throw std::runtime_error("build_local_systems: vertex " + std::to_string(v) +
                             " has no free stress dofs but an active rotation");
  }
  if (!L.velocity_dofs.empty()) {
    L.Z_fac.compute(L.Z);
    if (L.Z_fac.info() != Eigen::Success || !L.Z_fac.isPositive())
      throw std::runtime_error("build_local_systems: singular velocity block at vertex " +
                               std::to_string(v));
    L.pz_rows = coupled_rows(blocks.vel_div, L.velocity_dofs);
    L.Zp = dense_block(blocks.vel_div, L.pz_rows, L.velocity_dofs);
  }
  return L;
}

}  // namespace

std::vector<LocalVertexSystem> build_local_systems(const BlockSystem& blocks, const Mesh& mesh,
                                                   const DofMaps& dofs, const ConstraintSet& cs,
                                                   ExecPolicy policy) {
  const int nv = mesh.n_nodes();
  const auto sfixed = fixed_mask(dofs.stress.n_dofs, cs.stress);
  const auto zfixed = fixed_mask(dofs.velocity.n_dofs, cs.velocity);
  std::vector<char> rot_fixed(nv, 0);
  for (int v : cs.rotation_fixed) rot_fixed[v] = 1;

  std::vector<LocalVertexSystem> locals(nv);
  if (policy == ExecPolicy::serial) {
    for (int v = 0; v < nv; ++v)
      locals[v] = make_local(blocks, mesh, dofs, sfixed, zfixed, rot_fixed, v);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (int v = 0; v < nv; ++v)
      locals[v] = make_local(blocks, mesh, dofs, sfixed, zfixed, rot_fixed, v);
  }
  return locals;
}

namespace {

// Per-vertex contributions to the reduced blocks.
struct VertexSchur {
  std::vector<Triplet> a11, a12, a22;
};

VertexSchur vertex_schur(const LocalVertexSystem& L, double dt) {
  VertexSchur out;
  const int nu = static_cast<int>(L.u_rows.size());
  const int np = static_cast<int>(L.p_rows.size());

  if (!L.stress_dofs.empty()) {
    // M stacks the couplings so that M S^-1 M^T yields all needed products.
    Eigen::MatrixXd M(nu + 1 + np, L.stress_dofs.size());
    M.topRows(nu) = L.U;
    M.row(nu) = L.G;
    M.bottomRows(np) = L.P;
    Eigen::MatrixXd T = M * L.S_fac.solve(M.transpose());

    Eigen::MatrixXd usu = T.topLeftCorner(nu, nu);
    Eigen::VectorXd usg = T.block(0, nu, nu, 1);
    Eigen::MatrixXd usp = T.topRightCorner(nu, np);
    const double gsg = T(nu, nu);
    Eigen::VectorXd gsp = T.block(nu, nu + 1, 1, np).transpose();
    Eigen::MatrixXd psp = T.bottomRightCorner(np, np);

    Eigen::MatrixXd a11 = usu;
    Eigen::MatrixXd a12 = usp;
    Eigen::MatrixXd a22 = -psp;
    if (!L.rotation_fixed) {
      a11 -= usg * usg.transpose() / gsg;
      a12 -= usg * gsp.transpose() / gsg;
      a22 += gsp * gsp.transpose() / gsg;
    }
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nu; ++j) out.a11.emplace_back(L.u_rows[i], L.u_rows[j], a11(i, j));
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < np; ++j) out.a12.emplace_back(L.u_rows[i], L.p_rows[j], a12(i, j));
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j) out.a22.emplace_back(L.p_rows[i], L.p_rows[j], a22(i, j));
  }

  if (!L.velocity_dofs.empty()) {
    Eigen::MatrixXd zsz = L.Zp * L.Z_fac.solve(L.Zp.transpose());
    const int npz = static_cast<int>(L.pz_rows.size());
    for (int i = 0; i < npz; ++i)
      for (int j = 0; j < npz; ++j)
        out.a22.emplace_back(L.pz_rows[i], L.pz_rows[j], dt * zsz(i, j));
  }
  return out;
}

}  // namespace

namespace {

// Duplicate constraints with different values corrupt the fold; reject early.
void check_no_conflicts(const std::vector<Constraint>& cs) {
  std::vector<Constraint> sorted = cs;
  std::sort(sorted.begin(), sorted.end(),
            [](const Constraint& a, const Constraint& b) { return a.dof < b.dof; });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].dof == sorted[i - 1].dof && sorted[i].value != sorted[i - 1].value)
      throw std::runtime_error("conflicting duplicate constraints on dof " +
                               std::to_string(sorted[i].dof));
}

// Columns of A at the constrained dofs, in constraint order.
SpMat fixed_columns(const SpMat& A, const std::vector<Constraint>& cs) {
  SpMat out(A.rows(), cs.size());
  std::vector<Triplet> t;
  for (size_t j = 0; j < cs.size(); ++j)
    for (SpMat::InnerIterator it(A, cs[j].dof); it; ++it)
      t.emplace_back(it.row(), static_cast<int>(j), it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

ReducedSystem eliminate(const BlockSystem& blocks, const Mesh& mesh, const DofMaps& dofs,
                        const ConstraintSet& cs, double dt, ExecPolicy policy) {
  ReducedSystem red;
  red.dt = dt;
  check_no_conflicts(cs.stress);
  check_no_conflicts(cs.velocity);
  red.locals = build_local_systems(blocks, mesh, dofs, cs, policy);
  red.stress_fixed = cs.stress;
  red.velocity_fixed = cs.velocity;
  red.rotation_fixed = cs.rotation_fixed;
  red.C_ss = fixed_columns(blocks.stress_mass, cs.stress);
  red.C_ds = fixed_columns(blocks.stress_div, cs.stress);
  red.C_sg = fixed_columns(blocks.stress_rot, cs.stress);
  red.C_sp = fixed_columns(blocks.stress_pres, cs.stress);
  red.C_zz = fixed_columns(blocks.vel_mass, cs.velocity);
  red.C_dz = fixed_columns(blocks.vel_div, cs.velocity);
  red.n_sigma = dofs.stress.n_dofs;
  red.n_u = dofs.displacement.n_dofs;
  red.n_gamma = dofs.rotation.n_dofs;
  red.n_z = dofs.velocity.n_dofs;
  red.n_p = dofs.pressure.n_dofs;

  const int nv = mesh.n_nodes();
  std::vector<VertexSchur> per_vertex(nv);
  if (policy == ExecPolicy::serial) {
    for (int v = 0; v < nv; ++v) per_vertex[v] = vertex_schur(red.locals[v], dt);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (int v = 0; v < nv; ++v) per_vertex[v] = vertex_schur(red.locals[v], dt);
  }

  std::vector<Triplet> t11, t12, t22;
  for (int v = 0; v < nv; ++v) {
    auto& V = per_vertex[v];
    t11.insert(t11.end(), V.a11.begin(), V.a11.end());
    t12.insert(t12.end(), V.a12.begin(), V.a12.end());
    t22.insert(t22.end(), V.a22.begin(), V.a22.end());
  }
  // A_pp enters A22 once, outside the vertex loop.
  for (int c = 0; c < blocks.pres_mass.outerSize(); ++c)
    for (SpMat::InnerIterator it(blocks.pres_mass, c); it; ++it)
      t22.emplace_back(it.row(), it.col(), it.value());

  red.A11.resize(red.n_u, red.n_u);
  red.A11.setFromTriplets(t11.begin(), t11.end());
  red.A12.resize(red.n_u, red.n_p);
  red.A12.setFromTriplets(t12.begin(), t12.end());
  red.A22.resize(red.n_p, red.n_p);
  red.A22.setFromTriplets(t22.begin(), t22.end());
  red.A21 = SpMat(-red.A12.transpose());
  red.A11.makeCompressed();
  red.A12.makeCompressed();
  red.A21.makeCompressed();
  red.A22.makeCompressed();
  return red;
}

ReducedRhs reduce_rhs(const ReducedSystem& red, const RhsVectors& rhs) {
  ReducedRhs out;
  // Fold the known (essentially constrained) stress and velocity values into
  // the five-field rows before running the elimination.
  Eigen::VectorXd g_s(red.stress_fixed.size()), g_z(red.velocity_fixed.size());
  for (size_t i = 0; i < red.stress_fixed.size(); ++i) g_s[i] = red.stress_fixed[i].value;
  for (size_t i = 0; i < red.velocity_fixed.size(); ++i) g_z[i] = red.velocity_fixed[i].value;

  Eigen::VectorXd b_sigma = rhs.b_sigma - red.C_ss * g_s;
  Eigen::VectorXd b_u = rhs.b_u + red.C_ds * g_s;
  Eigen::VectorXd b_gamma = rhs.b_gamma + red.C_sg * g_s;
  Eigen::VectorXd b_z = rhs.b_z - red.C_zz * g_z;
  Eigen::VectorXd b_p = rhs.b_p - red.C_sp * g_s - red.dt * (red.C_dz * g_z);
  out.b_sigma_mod = b_sigma;
  out.b_z_mod = b_z;

  out.r_u = b_u;
  out.r_p = b_p;
  out.b_gamma_mod = b_gamma;

  for (const auto& L : red.locals) {
    if (!L.stress_dofs.empty()) {
      Eigen::VectorXd bs(L.stress_dofs.size());
      for (size_t i = 0; i < L.stress_dofs.size(); ++i) bs[i] = b_sigma[L.stress_dofs[i]];
      Eigen::VectorXd Sinv_bs = L.S_fac.solve(bs);
      Eigen::VectorXd uloc = L.U * Sinv_bs;
      for (size_t i = 0; i < L.u_rows.size(); ++i) out.r_u[L.u_rows[i]] += uloc[i];
      Eigen::VectorXd ploc = L.P * Sinv_bs;
      for (size_t i = 0; i < L.p_rows.size(); ++i) out.r_p[L.p_rows[i]] -= ploc[i];
      if (!L.rotation_fixed) out.b_gamma_mod[L.vertex] += L.G.dot(Sinv_bs);
    }
    if (!L.velocity_dofs.empty()) {
      Eigen::VectorXd bz(L.velocity_dofs.size());
      for (size_t i = 0; i < L.velocity_dofs.size(); ++i) bz[i] = b_z[L.velocity_dofs[i]];
      Eigen::VectorXd zloc = L.Zp * L.Z_fac.solve(bz);
      for (size_t i = 0; i < L.pz_rows.size(); ++i) out.r_p[L.pz_rows[i]] -= red.dt * zloc[i];
    }
  }

  // Rotation stage: r_u -= A_usg g^-1 b_gamma, r_p += A_gsp^T g^-1 b_gamma.
  for (const auto& L : red.locals) {
    if (L.stress_dofs.empty() || L.rotation_fixed) continue;
    const double scale = out.b_gamma_mod[L.vertex] / L.gamma_schur;
    if (scale == 0.0) continue;
    Eigen::VectorXd SinvG = L.S_fac.solve(L.G.transpose());
    Eigen::VectorXd usg = L.U * SinvG;
    Eigen::VectorXd gsp = L.P * SinvG;
    for (size_t i = 0; i < L.u_rows.size(); ++i) out.r_u[L.u_rows[i]] -= usg[i] * scale;
    for (size_t i = 0; i < L.p_rows.size(); ++i) out.r_p[L.p_rows[i]] += gsp[i] * scale;
  }
  return out;
}

KrylovResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_A,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_Minv,
                   const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int restart,
                   int max_iterations) {
  const double bnorm = b.norm();
  KrylovResult res;
  x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) return res;

  int total = 0;
  double relres = 1.0;
  while (total < max_iterations) {
    Eigen::VectorXd r = b - apply_A(x);
    double beta = r.norm();
    relres = beta / bnorm;
    if (relres <= tol) break;

    const int m = std::min(restart, max_iterations - total);
    Eigen::MatrixXd V(b.size(), m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;

    int j = 0;
    for (; j < m; ++j) {
      Eigen::VectorXd w = apply_A(apply_Minv(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0) V.col(j + 1) = w / H(j + 1, j);
      // Givens rotations keep the least-squares residual explicit.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++total;
      relres = std::abs(g[j + 1]) / bnorm;
      if (relres <= tol) {
        ++j;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += apply_Minv(V.leftCols(j) * y);
    if (relres <= tol) break;
  }
  res.iterations = total;
  Eigen::VectorXd r = b - apply_A(x);
  res.rel_residual = r.norm() / bnorm;
  res.converged = res.rel_residual <= tol;
  return res;
}

KrylovResult solve_reduced(ReducedSystem& red, const ReducedRhs& rhs, double tol,
                           Eigen::VectorXd& u, Eigen::VectorXd& p, int restart,
                           int max_iterations) {
  if (!(tol > 0) || !(tol < 1)) throw std::invalid_argument("solve_reduced: tol must be in (0,1)");
  if (!red.fac11) {
    red.fac11 = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(red.A11);
    if (red.fac11->info() != Eigen::Success)
      throw std::runtime_error("solve_reduced: A11 factorization failed");
  }
  if (!red.fac22) {
    red.fac22 = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(red.A22);
    if (red.fac22->info() != Eigen::Success)
      throw std::runtime_error("solve_reduced: A22 factorization failed");
  }
  const int nu = red.n_u, np = red.n_p;
  Eigen::VectorXd b(nu + np);
  b << rhs.r_u, rhs.r_p;

  auto apply_A = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(nu + np);
    out.head(nu) = red.A11 * x.head(nu) + red.A12 * x.tail(np);
    out.tail(np) = red.A21 * x.head(nu) + red.A22 * x.tail(np);
    return out;
  };
  auto apply_Minv = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(nu + np);
    out.head(nu) = red.fac11->solve(x.head(nu));
    out.tail(np) = red.fac22->solve(x.tail(np));
    return out;
  };

  Eigen::VectorXd x;
  KrylovResult res = gmres(apply_A, apply_Minv, b, x, tol, restart, max_iterations);
  if (!res.converged)
    throw std::runtime_error("solve_reduced: GMRES did not converge (relative residual " +
                             std::to_string(res.rel_residual) + ")");
  u = x.head(nu);
  p = x.tail(np);
  return res;
}

RecoveredFields recover_fields(const ReducedSystem& red, const ReducedRhs& rhs,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& p) {
  RecoveredFields out;
  out.sigma = Eigen::VectorXd::Zero(red.n_sigma);
  out.gamma = Eigen::VectorXd::Zero(red.n_gamma);
  out.z = Eigen::VectorXd::Zero(red.n_z);

  for (const auto& L : red.locals) {
    // gamma from its Schur relation, then sigma, then z.
    double gamma_v = 0.0;
    if (!L.stress_dofs.empty()) {
      Eigen::VectorXd rhs_s(L.stress_dofs.size());
      for (size_t i = 0; i < L.stress_dofs.size(); ++i) rhs_s[i] = rhs.b_sigma_mod[L.stress_dofs[i]];
      Eigen::VectorXd uloc(L.u_rows.size()), ploc(L.p_rows.size());
      for (size_t i = 0; i < L.u_rows.size(); ++i) uloc[i] = u[L.u_rows[i]];
      for (size_t i = 0; i < L.p_rows.size(); ++i) ploc[i] = p[L.p_rows[i]];
      rhs_s -= L.U.transpose() * uloc;
      rhs_s -= L.P.transpose() * ploc;
      if (!L.rotation_fixed) {
        // b_gamma_mod already holds b_gamma + G S^-1 b_sigma.
        Eigen::VectorXd SinvG = L.S_fac.solve(L.G.transpose());
        const double coupling = (L.U * SinvG).dot(uloc) + (L.P * SinvG).dot(ploc);
        gamma_v = (rhs.b_gamma_mod[L.vertex] - coupling) / L.gamma_schur;
        // Consistency with the gamma Schur relation:
        //   gamma = g^-1 (b_gamma_mod - A_usg^T u - A_gsp p)
        rhs_s -= L.G.transpose() * gamma_v;
      }
      Eigen::VectorXd sigma_loc = L.S_fac.solve(rhs_s);
      for (size_t i = 0; i < L.stress_dofs.size(); ++i) out.sigma[L.stress_dofs[i]] = sigma_loc[i];
      out.gamma[L.vertex] = gamma_v;
    }
    if (!L.velocity_dofs.empty()) {
      Eigen::VectorXd rhs_z(L.velocity_dofs.size());
      for (size_t i = 0; i < L.velocity_dofs.size(); ++i) rhs_z[i] = rhs.b_z_mod[L.velocity_dofs[i]];
      Eigen::VectorXd ploc(L.pz_rows.size());
      for (size_t i = 0; i < L.pz_rows.size(); ++i) ploc[i] = p[L.pz_rows[i]];
      rhs_z += L.Zp.transpose() * ploc;
      Eigen::VectorXd z_loc = L.Z_fac.solve(rhs_z);
      for (size_t i = 0; i < L.velocity_dofs.size(); ++i) out.z[L.velocity_dofs[i]] = z_loc[i];
    }
  }

  for (const auto& c : red.stress_fixed) out.sigma[c.dof] = c.value;
  for (const auto& c : red.velocity_fixed) out.z[c.dof] = c.value;
  return out;
}

}  // namespace msmfe
