#include <doctest.h>

#include <cmath>
#include <sstream>

#include "msmfe/mesh.hpp"

using namespace msmfe;

TEST_CASE("rectangle mesh: single quad") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::quadrilateral);
  CHECK(m.n_cells() == 1);
  CHECK(m.n_nodes() == 4);
  CHECK(m.n_edges() == 4);
  int boundary = 0;
  for (const auto& e : m.edges) boundary += e.boundary();
  CHECK(boundary == 4);
}

TEST_CASE("rectangle mesh: 2x2 quad counts") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::quadrilateral);
  CHECK(m.n_cells() == 4);
  CHECK(m.n_nodes() == 9);
  CHECK(m.n_edges() == 12);
  int boundary = 0;
  for (const auto& e : m.edges) boundary += e.boundary();
  CHECK(boundary == 8);
  CHECK(m.n_edges() - boundary == 4);
}

TEST_CASE("rectangle mesh: single split quad") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::triangle);
  CHECK(m.n_cells() == 2);
  CHECK(m.n_edges() == 5);
  int interior = -1;
  for (int e = 0; e < m.n_edges(); ++e)
    if (!m.edges[e].boundary()) {
      interior = e;
      CHECK(m.edges[e].cell_lo == 0);
      CHECK(m.edges[e].cell_hi == 1);
    }
  REQUIRE(interior >= 0);
  // the shared diagonal runs bottom-left to top-right
  CHECK(m.edges[interior].v0 == 0);
  CHECK(m.edges[interior].v1 == 3);
}

TEST_CASE("rectangle mesh: input validation") {
  CHECK_THROWS(build_rectangle_mesh({0, 0, 1, 1}, 0, 1, CellType::quadrilateral));
  CHECK_THROWS(build_rectangle_mesh({0, 0, 1, 1}, 1, 0, CellType::triangle));
  CHECK_THROWS(build_rectangle_mesh({0, 0, 0, 1}, 1, 1, CellType::quadrilateral));
  CHECK_THROWS(build_rectangle_mesh({0, 1, 1, 1}, 2, 2, CellType::quadrilateral));
}

TEST_CASE("distortion map values") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::quadrilateral);
  Mesh d = distort_example2(m);
  // center node is a zero of cos(3 pi / 2)
  CHECK(d.nodes[4].x() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.nodes[4].y() == doctest::Approx(0.5).epsilon(1e-14));
  // origin moves by (0.03, -0.04)
  CHECK(d.nodes[0].x() == doctest::Approx(0.03).epsilon(1e-14));
  CHECK(d.nodes[0].y() == doctest::Approx(-0.04).epsilon(1e-14));
  Mesh shifted = build_rectangle_mesh({1, 1, 2, 2}, 1, 1, CellType::quadrilateral);
  CHECK_THROWS(distort_example2(shifted));
}

TEST_CASE("uniform refinement counts and diameters") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::quadrilateral);
  Mesh r = refine_uniform(m);
  CHECK(r.n_cells() == 4);
  CHECK(r.n_nodes() == 9);
  Mesh rr = refine_uniform(r);
  CHECK(rr.n_cells() == 16);

  Mesh t = build_rectangle_mesh({0, 0, 2, 1}, 4, 2, CellType::triangle);
  Mesh rt = refine_uniform(t);
  CHECK(rt.n_cells() == 4 * t.n_cells());
  CHECK(rt.max_diameter() == doctest::Approx(0.5 * t.max_diameter()).epsilon(1e-15));

  Mesh q = build_rectangle_mesh({0, 0, 3, 2}, 3, 2, CellType::quadrilateral);
  CHECK(refine_uniform(q).max_diameter() == doctest::Approx(0.5 * q.max_diameter()).epsilon(1e-15));
}

TEST_CASE("refinement inherits boundary tags") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::triangle);
  Mesh r = refine_uniform(m);
  int top = 0, bottom = 0, left = 0, right = 0, interior_tagged = 0;
  for (int e = 0; e < r.n_edges(); ++e) {
    if (!r.edges[e].boundary()) {
      if (!r.edge_tag[e].empty()) ++interior_tagged;
      continue;
    }
    const std::string& t = r.edge_tag[e];
    top += t == "top";
    bottom += t == "bottom";
    left += t == "left";
    right += t == "right";
  }
  CHECK(top == 4);
  CHECK(bottom == 4);
  CHECK(left == 4);
  CHECK(right == 4);
  CHECK(interior_tagged == 0);
}

TEST_CASE("h^2-parallelogram hierarchy") {
  Mesh coarse = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, CellType::quadrilateral));
  double h = 0.25;
  double C0 = -1;
  Mesh m = coarse;
  for (int level = 0; level < 4; ++level) {
    double defect = 0;
    for (int c = 0; c < m.n_cells(); ++c) defect = std::max(defect, m.parallelogram_defect(c));
    const double C = defect / (h * h);
    if (level == 0)
      C0 = C;
    else
      CHECK(C == doctest::Approx(C0).epsilon(1e-9));  // defect quarters exactly
    m = refine_uniform(m);
    h /= 2;
  }
  CHECK(C0 > 0);
}

TEST_CASE("element map: identity and scaled cells") {
  Mesh ref = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::quadrilateral);
  ElementMap em = element_map(ref, 0);
  CHECK((em.map({0.3, 0.7}) - Eigen::Vector2d(0.3, 0.7)).norm() == doctest::Approx(0).epsilon(1e-15));
  CHECK((em.jacobian({0.3, 0.7}) - Eigen::Matrix2d::Identity()).norm() ==
        doctest::Approx(0).epsilon(1e-15));
  CHECK(em.jac_det({0.5, 0.5}) == doctest::Approx(1.0));

  Mesh half = build_rectangle_mesh({0, 0, 0.5, 0.5}, 1, 1, CellType::quadrilateral);
  ElementMap em2 = element_map(half, 0);
  CHECK((em2.jacobian({0.2, 0.9}) - 0.5 * Eigen::Matrix2d::Identity()).norm() ==
        doctest::Approx(0).epsilon(1e-15));
  CHECK(em2.jac_det({0.8, 0.1}) == doctest::Approx(0.25));
  CHECK(em2.area() == doctest::Approx(0.25));
}

TEST_CASE("element map: distorted coarse cell has affine positive J") {
  Mesh m = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, CellType::quadrilateral));
  for (int c = 0; c < m.n_cells(); ++c) {
    ElementMap em = element_map(m, c);
    // J is affine: J(x,y) = J00 + (J10-J00) x + (J01-J00) y reproduces midpoints
    const double j00 = em.jac_det({0, 0}), j10 = em.jac_det({1, 0}), j01 = em.jac_det({0, 1});
    CHECK(em.jac_det({0.5, 0.5}) ==
          doctest::Approx(j00 + 0.5 * (j10 - j00) + 0.5 * (j01 - j00)).epsilon(1e-12));
    for (double x = 0; x <= 1.0001; x += 0.25)
      for (double y = 0; y <= 1.0001; y += 0.25) CHECK(em.jac_det({x, y}) > 0);
  }
}

TEST_CASE("element map: inverted cell rejected") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::quadrilateral);
  std::swap(m.cells[0][1], m.cells[0][3]);  // clockwise ordering
  CHECK_THROWS(element_map(m, 0));
  CHECK_THROWS(element_map(m, 7));
}

TEST_CASE("piola transform values") {
  Mesh ref = build_rectangle_mesh({0, 0, 1, 1}, 1, 1, CellType::quadrilateral);
  ElementMap em = element_map(ref, 0);
  Eigen::Vector2d v = piola_vector(em, {1, 0}, {0.5, 0.5});
  CHECK(v.x() == doctest::Approx(1.0));
  CHECK(v.y() == doctest::Approx(0.0));

  Mesh half = build_rectangle_mesh({0, 0, 0.5, 0.5}, 1, 1, CellType::quadrilateral);
  ElementMap em2 = element_map(half, 0);
  Eigen::Vector2d w = piola_vector(em2, {1, 0}, {0.25, 0.75});
  CHECK(w.x() == doctest::Approx(2.0));
  CHECK(w.y() == doctest::Approx(0.0));
  // normal-flux consistency: zeta.n = zeta-hat.n-hat / |J DF^-T n-hat|
  const Eigen::Matrix2d DF = em2.jacobian({0.25, 0.75});
  const double J = em2.jac_det({0.25, 0.75});
  const Eigen::Vector2d nhat(1, 0);
  const double scale = (J * DF.inverse().transpose() * nhat).norm();
  CHECK(w.dot(nhat) == doctest::Approx(1.0 / scale));
  CHECK(1.0 / scale == doctest::Approx(2.0));

  Eigen::Matrix2d T;
  T << 1, 2, 3, 4;
  Eigen::Matrix2d PT = piola_tensor(em2, T, {0.1, 0.2});
  CHECK((PT.row(0).transpose() - piola_vector(em2, T.row(0), {0.1, 0.2})).norm() ==
        doctest::Approx(0).epsilon(1e-15));
  CHECK((PT.row(1).transpose() - piola_vector(em2, T.row(1), {0.1, 0.2})).norm() ==
        doctest::Approx(0).epsilon(1e-15));
}

TEST_CASE("piola divergence scaling against finite differences") {
  Mesh m = distort_example2(build_rectangle_mesh({0, 0, 1, 1}, 4, 4, CellType::quadrilateral));
  ElementMap em = element_map(m, 5);
  // reference field with non-trivial divergence
  auto vhat = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(x.x() * x.x() + x.y(), x.x() - 2 * x.y() * x.y());
  };
  auto div_vhat = [](const Eigen::Vector2d& x) { return 2 * x.x() - 4 * x.y(); };
  const double eps = 1e-6;
  for (const Eigen::Vector2d xh : {Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(0.6, 0.2)}) {
    // physical divergence via finite differences of the mapped field in
    // physical coordinates
    auto phys = [&](const Eigen::Vector2d& xhat) { return piola_vector(em, vhat(xhat), xhat); };
    // invert the map locally: perturb reference coordinates, use the chain rule
    const Eigen::Matrix2d DF = em.jacobian(xh);
    const Eigen::Matrix2d DFinv = DF.inverse();
    Eigen::Matrix2d grad_ref;  // d(phys component)/d(xhat)
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[j] = eps;
      grad_ref.col(j) = (phys(xh + e) - phys(xh - e)) / (2 * eps);
    }
    const Eigen::Matrix2d grad_phys = grad_ref * DFinv;
    const double div_fd = grad_phys(0, 0) + grad_phys(1, 1);
    const double div_exact = div_vhat(xh) / em.jac_det(xh);
    CHECK(div_fd == doctest::Approx(div_exact).epsilon(1e-6));
  }
}

TEST_CASE("mesh file round trip") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 3, CellType::triangle);
  std::stringstream ss;
  write_mesh(m, ss);
  Mesh r = read_mesh(ss);
  CHECK(r.n_nodes() == m.n_nodes());
  CHECK(r.n_cells() == m.n_cells());
  CHECK(r.n_edges() == m.n_edges());
  for (int v = 0; v < m.n_nodes(); ++v)
    CHECK((r.nodes[v] - m.nodes[v]).norm() == doctest::Approx(0).epsilon(1e-16));
  for (int e = 0; e < m.n_edges(); ++e) CHECK(r.edge_tag[e] == m.edge_tag[e]);
}

TEST_CASE("mesh file: comments and errors") {
  std::stringstream good("# header comment\nmsmfe-mesh 1 quad # inline\n4 1\n0 0\n1 0\n1 1\n0 1\n"
                         "0 1 2 3\n1\n0 1 south\n");
  Mesh m = read_mesh(good);
  CHECK(m.n_cells() == 1);
  int tagged = 0;
  for (int e = 0; e < m.n_edges(); ++e)
    if (!m.edge_tag[e].empty()) {
      ++tagged;
      CHECK(m.edge_tag[e] == "south");
    }
  CHECK(tagged == 1);

  std::stringstream bad_magic("wrong 1 quad\n");
  CHECK_THROWS(read_mesh(bad_magic));
  std::stringstream bad_kind("msmfe-mesh 1 hex\n4 1\n");
  CHECK_THROWS(read_mesh(bad_kind));
  std::stringstream interior_tag(
      "msmfe-mesh 1 tri\n4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n1\n0 2 diag\n");
  CHECK_THROWS(read_mesh(interior_tag));
}

TEST_CASE("retag boundary") {
  Mesh m = build_rectangle_mesh({-50, 0, 50, 75}, 6, 3, CellType::triangle);
  Mesh r = retag_boundary(m, [](const Eigen::Vector2d& mid, const std::string& tag) {
    if (tag == "top") return std::abs(mid.x()) < 50.0 / 3.0 ? std::string("g1") : std::string("g2");
    return std::string("g3");
  });
  int g1 = 0, g2 = 0, g3 = 0;
  for (int e = 0; e < r.n_edges(); ++e) {
    if (!r.edges[e].boundary()) continue;
    g1 += r.edge_tag[e] == "g1";
    g2 += r.edge_tag[e] == "g2";
    g3 += r.edge_tag[e] == "g3";
  }
  CHECK(g1 == 2);
  CHECK(g2 == 4);
  CHECK(g3 == 12);
}

TEST_CASE("edge normals point outward from the owner cell") {
  Mesh m = build_rectangle_mesh({0, 0, 1, 1}, 2, 2, CellType::quadrilateral);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Eigen::Vector2d n = m.edge_normal(e);
    CHECK(n.norm() == doctest::Approx(1.0));
    if (m.edges[e].boundary()) {
      // outward: points away from the domain center
      const Eigen::Vector2d mid = m.edge_midpoint(e);
      CHECK(n.dot(mid - Eigen::Vector2d(0.5, 0.5)) > 0);
    }
  }
}
