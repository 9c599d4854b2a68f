#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <sstream>

#include "msmfe/assembly.hpp"
#include "msmfe/cli.hpp"
#include "msmfe/quadrature.hpp"
#include "msmfe/verify.hpp"

using namespace msmfe;

namespace {

MaterialModel identity_model() {
  MaterialModel m;
  m.mu = [](const Eigen::Vector2d&) { return 0.5; };
  m.lambda = [](const Eigen::Vector2d&) { return 0.0; };
  m.permeability = [](const Eigen::Vector2d&) {
    return Eigen::Matrix2d(Eigen::Matrix2d::Identity());
  };
  m.c0 = 1.0;
  m.alpha = 1.0;
  return m;
}

Eigen::MatrixXd block_of(const SpMat& A, const std::vector<int>& dofs) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dofs.size(), dofs.size());
  for (size_t j = 0; j < dofs.size(); ++j)
    for (SpMat::InnerIterator it(A, dofs[j]); it; ++it)
      for (size_t i = 0; i < dofs.size(); ++i)
        if (it.row() == dofs[i]) B(i, j) = it.value();
  return B;
}

}  // namespace

TEST_CASE("single reference triangle: velocity mass equals the hand-assembled Gram") {
  Mesh m;
  m.cell_type = CellType::triangle;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.cells = {{0, 1, 2, -1}};
  std::stringstream ss;
  ss << "msmfe-mesh 1 tri\n3 1\n0 0\n1 0\n0 1\n0 1 2\n3\n0 1 b\n1 2 h\n0 2 l\n";
  m = read_mesh(ss);
  DofMaps dofs = build_dofmaps(m);
  BlockSystem B = assemble_blocks(m, dofs, identity_model());

  Eigen::MatrixXd Z = Eigen::MatrixXd(B.vel_mass);
  REQUIRE(Z.rows() == 6);
  // vertex (0,0): dofs 0 and 4, values (0,-1) and (-1,0)
  CHECK(Z(0, 0) == doctest::Approx(1.0 / 6));
  CHECK(Z(4, 4) == doctest::Approx(1.0 / 6));
  CHECK(Z(0, 4) == doctest::Approx(0.0));
  // vertex (1,0): dofs 1 and 2, values (1,-1) and (sqrt2, 0)
  CHECK(Z(1, 1) == doctest::Approx(2.0 / 6));
  CHECK(Z(2, 2) == doctest::Approx(2.0 / 6));
  CHECK(Z(1, 2) == doctest::Approx(M_SQRT2 / 6));
  // vertex (0,1): dofs 3 and 5
  CHECK(Z(3, 3) == doctest::Approx(2.0 / 6));
  CHECK(Z(5, 5) == doctest::Approx(2.0 / 6));
  CHECK(Z(3, 5) == doctest::Approx(M_SQRT2 / 6));
  // everything outside vertex blocks vanishes
  CHECK(sparsity_within_vertex_groups(B.vel_mass, dofs.velocity.vertex_groups));

  // stress divergence coupling integrates exactly: (le0, ep0) has div-hat 1
  Eigen::MatrixXd Ds = Eigen::MatrixXd(B.stress_div);
  CHECK(Ds(0, 0) == doctest::Approx(0.5));  // row-0 dof against u_x indicator
  CHECK(Ds(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("2x2 quad mesh: velocity block structure by vertex valence") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::quadrilateral);
  DofMaps dofs = build_dofmaps(m);
  BlockSystem B = assemble_blocks(m, dofs, identity_model());
  CHECK(dofs.velocity.n_dofs == 24);
  CHECK(sparsity_within_vertex_groups(B.vel_mass, dofs.velocity.vertex_groups));
  CHECK(sparsity_within_vertex_groups(B.stress_mass, dofs.stress.vertex_groups));
  int total = 0;
  std::vector<size_t> sizes;
  for (int v = 0; v < m.n_nodes(); ++v) {
    sizes.push_back(dofs.velocity.vertex_groups[v].size());
    total += static_cast<int>(dofs.velocity.vertex_groups[v].size());
  }
  CHECK(total == 24);
  // valences on the 3x3 vertex grid: corners 2, edge midpoints 3, center 4
  std::vector<size_t> expect = {2, 3, 2, 3, 4, 3, 2, 3, 2};
  CHECK(sizes == expect);
}

TEST_CASE("vertex blocks are symmetric positive definite") {
  for (CellType ct : {CellType::triangle, CellType::quadrilateral}) {
    Mesh m = ct == CellType::quadrilateral
                 ? refine_uniform(distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, ct)))
                 : build_rectangle_mesh({0, 0, 1, 1}, 8, 8, ct);
    DofMaps dofs = build_dofmaps(m);
    BlockSystem B = assemble_blocks(m, dofs, material_preset("example2"));
    CHECK(sparsity_within_vertex_groups(B.vel_mass, dofs.velocity.vertex_groups));
    CHECK(sparsity_within_vertex_groups(B.stress_mass, dofs.stress.vertex_groups));
    for (int v = 0; v < m.n_nodes(); ++v) {
      for (const SpMat* A : {&B.vel_mass, &B.stress_mass}) {
        const auto& group = A == &B.vel_mass ? dofs.velocity.vertex_groups[v]
                                             : dofs.stress.vertex_groups[v];
        Eigen::MatrixXd blk = block_of(*A, group);
        CHECK((blk - blk.transpose()).norm() <= 1e-12 * blk.norm());
        Eigen::LLT<Eigen::MatrixXd> llt(blk);
        CHECK(llt.info() == Eigen::Success);
      }
    }
  }
}

TEST_CASE("rotation coupling lives on vertex stress dofs only") {
  Mesh m = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 3, 3, CellType::quadrilateral));
  DofMaps dofs = build_dofmaps(m);
  BlockSystem B = assemble_blocks(m, dofs, identity_model());
  std::vector<int> vertex_of(dofs.stress.n_dofs, -1);
  for (int v = 0; v < m.n_nodes(); ++v)
    for (int d : dofs.stress.vertex_groups[v]) vertex_of[d] = v;
  for (int col = 0; col < B.stress_rot.outerSize(); ++col)
    for (SpMat::InnerIterator it(B.stress_rot, col); it; ++it)
      CHECK(it.row() == vertex_of[it.col()]);
}

TEST_CASE("pressure-stress coupling action on the constant pressure") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::triangle);
  DofMaps dofs = build_dofmaps(m);
  MaterialModel model = material_preset("example2");
  BlockSystem B = assemble_blocks(m, dofs, model);
  // (A_sp^T 1)[j] must match alpha (A I, b_j)_Q assembled independently
  Eigen::VectorXd lhs = B.stress_pres.transpose() * Eigen::VectorXd::Ones(m.n_cells());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.stress.n_dofs);
  const QuadratureRule vr = vertex_rule(m.cell_type);
  const int s = m.corners();
  for (int c = 0; c < m.n_cells(); ++c) {
    ElementMap em = element_map(m, c);
    for (int i = 0; i < s; ++i) {
      const double w = vr.weights[i] * em.jac_det(vr.points[i]);
      const Eigen::Vector2d xp = em.map(vr.points[i]);
      const Eigen::Matrix2d AI = compliance_apply(model, Eigen::Matrix2d::Identity(), xp);
      const Eigen::Matrix2d DF = em.jacobian(vr.points[i]);
      const double J = em.jac_det(vr.points[i]);
      for (int jv = 0; jv < 2 * s; ++jv) {
        const Eigen::Vector2d val = DF * bdm1_value(m.cell_type, jv, vr.points[i]) / J;
        for (int row = 0; row < 2; ++row) {
          Eigen::Matrix2d Bt = Eigen::Matrix2d::Zero();
          Bt.row(row) = val.transpose();
          const int loc = 2 * jv + row;
          rhs[dofs.stress.cell_dofs[c][loc]] +=
              model.alpha * w * dofs.stress.cell_coef[c][loc] * AI.cwiseProduct(Bt).sum();
        }
      }
    }
  }
  CHECK((lhs - rhs).norm() <= 1e-13 * (1 + rhs.norm()));
}

TEST_CASE("rhs: zero data gives zero vectors") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::quadrilateral);
  DofMaps dofs = build_dofmaps(m);
  SourceData d;
  d.body_force = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
  d.fluid_source = [](const Eigen::Vector2d&, double) { return 0.0; };
  for (const char* tag : {"left", "right", "bottom", "top"}) {
    d.dirichlet_displacement[tag] = [](const Eigen::Vector2d&, double) {
      return Eigen::Vector2d::Zero().eval();
    };
    d.dirichlet_pressure[tag] = [](const Eigen::Vector2d&, double) { return 0.0; };
  }
  RhsVectors r = assemble_rhs(m, dofs, d, 0.5, 0.1);
  CHECK(r.b_sigma.norm() == 0.0);
  CHECK(r.b_u.norm() == 0.0);
  CHECK(r.b_gamma.norm() == 0.0);
  CHECK(r.b_z.norm() == 0.0);
  CHECK(r.b_p.norm() == 0.0);
  CHECK_THROWS(assemble_rhs(m, dofs, d, 0.5, 0.0));
}

TEST_CASE("rhs: manufactured source integrates consistently across gauss orders") {
  ManufacturedProblem mp = make_example2();
  Mesh m = mp.mesh_for_level(0);
  DofMaps dofs = build_dofmaps(m);
  const double t = 1e-4, dt = 1e-4;
  RhsVectors r5 = assemble_rhs(m, dofs, mp.data, t, dt);
  // recompute (q, w) with the order-7 rule
  const QuadratureRule g7 = gauss_rule(m.cell_type, 7);
  for (int c = 0; c < m.n_cells(); ++c) {
    ElementMap em = element_map(m, c);
    double q = 0;
    for (size_t i = 0; i < g7.points.size(); ++i)
      q += g7.weights[i] * em.jac_det(g7.points[i]) * mp.q(em.map(g7.points[i]), t);
    CHECK(r5.b_p[c] == doctest::Approx(dt * q).epsilon(1e-10));
  }
}

TEST_CASE("essential constraints for the cantilever") {
  ExperimentSetup ex = make_cantilever(4, 4, 1e-3, 1e-3, CellType::quadrilateral);
  DofMaps dofs = build_dofmaps(ex.mesh);
  ConstraintSet cs = essential_constraints(ex.mesh, dofs, ex.data, 0.0);
  int boundary_edges = 0;
  for (const auto& e : ex.mesh.edges) boundary_edges += e.boundary();
  CHECK(cs.velocity.size() == size_t(2 * boundary_edges));
  for (const auto& c : cs.velocity) CHECK(c.value == 0.0);
  // traction rows on the top carry the load, x rows stay zero
  int loaded = 0;
  for (const auto& c : cs.stress)
    if (c.value != 0.0) {
      CHECK(c.value == doctest::Approx(-1.0));
      ++loaded;
    }
  CHECK(loaded == 2 * 4);  // y-row at both endpoints of each top edge
  // the two corners where traction edges meet have fully constrained stress;
  // their rotations are decoupled and get fixed
  REQUIRE(cs.rotation_fixed.size() == 2);
  for (int v : cs.rotation_fixed) {
    const Eigen::Vector2d x = ex.mesh.nodes[v];
    CHECK(x.x() == doctest::Approx(1.0));
    CHECK((std::abs(x.y()) < 1e-14 || std::abs(x.y() - 1.0) < 1e-14));
  }
}

TEST_CASE("apply_essential_bc: algebraic identity on a random matrix") {
  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  const int n = 6;
  Eigen::MatrixXd Ad(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Ad(i, j) = nd(rng);
  SpMat A = Ad.sparseView();
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = nd(rng);

  SpMat A0 = A;
  Eigen::VectorXd rhs0 = rhs;
  apply_essential_bc(A0, rhs0, {});
  CHECK((Eigen::MatrixXd(A0) - Ad).norm() == 0.0);
  CHECK((rhs0 - rhs).norm() == 0.0);

  const int k = 2;
  const double g = 1.0;
  SpMat A1 = A;
  Eigen::VectorXd rhs1 = rhs;
  apply_essential_bc(A1, rhs1, {{k, g}});
  Eigen::MatrixXd M(A1);
  for (int i = 0; i < n; ++i) {
    if (i == k) continue;
    CHECK(rhs1[i] == doctest::Approx(rhs[i] - Ad(i, k) * g).epsilon(1e-14));
    CHECK(M(i, k) == 0.0);
    CHECK(M(k, i) == 0.0);
  }
  CHECK(M(k, k) == 1.0);
  CHECK(rhs1[k] == g);

  SpMat A2 = A;
  Eigen::VectorXd rhs2 = rhs;
  CHECK_THROWS(apply_essential_bc(A2, rhs2, {{1, 0.0}, {1, 2.0}}));
  // identical duplicates are fine
  SpMat A3 = A;
  Eigen::VectorXd rhs3 = rhs;
  apply_essential_bc(A3, rhs3, {{1, 2.0}, {1, 2.0}});
  CHECK(rhs3[1] == 2.0);
}

TEST_CASE("triplet dump format") {
  SpMat A(2, 2);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, 1.5}, {1, 0, -2.0}};
  A.setFromTriplets(t.begin(), t.end());
  std::stringstream ss;
  dump_triplets(A, ss);
  CHECK(ss.str() == "0 0 1.5\n1 0 -2\n");
}
