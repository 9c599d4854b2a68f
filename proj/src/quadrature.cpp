#include "msmfe/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace msmfe {

namespace {

// Golub-Welsch: nodes/weights of the Gauss rule for the weight function whose
// monic orthogonal polynomials satisfy p_{k+1} = (x-a_k)p_k - b_k p_{k-1},
// with mu0 the total mass of the weight.
void golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0,
                  std::vector<double>& x, std::vector<double>& w) {
  const int n = static_cast<int>(a.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = a[i];
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = std::sqrt(b[i + 1]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    w[i] = mu0 * v * v;
  }
}

// Gauss-Legendre on [-1,1].
void legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (int k = 1; k < n; ++k) b[k] = double(k) * k / (4.0 * k * k - 1.0);
  golub_welsch(a, b, 2.0, x, w);
}

// Gauss-Jacobi for weight (1-x) on [-1,1] (alpha=1, beta=0).
void jacobi10(int n, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> a(n), b(n, 0.0);
  for (int k = 0; k < n; ++k) a[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
  for (int k = 1; k < n; ++k) b[k] = double(k) * (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
  golub_welsch(a, b, 2.0, x, w);
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights) {
  legendre(n, points, weights);
  for (int i = 0; i < n; ++i) {
    points[i] = 0.5 * (points[i] + 1.0);
    weights[i] *= 0.5;
  }
}

QuadratureRule vertex_rule(CellType cell) {
  QuadratureRule r;
  r.kind = QuadratureRule::Kind::vertex;
  r.cell = cell;
  if (cell == CellType::triangle) {
    r.points = {{0, 0}, {1, 0}, {0, 1}};
    r.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
  } else {
    r.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    r.weights = {0.25, 0.25, 0.25, 0.25};
  }
  return r;
}

QuadratureRule gauss_rule(CellType cell, int order) {
  if (order < 1 || order > 9) throw std::invalid_argument("gauss_rule: order must be in [1, 9]");
  QuadratureRule r;
  r.kind = QuadratureRule::Kind::gauss;
  r.order = order;
  r.cell = cell;
  const int n = (order + 2) / 2;  // ceil((order+1)/2)

  if (cell == CellType::quadrilateral) {
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.points.emplace_back(x[i], x[j]);
        r.weights.push_back(w[i] * w[j]);
      }
    return r;
  }

  if (order == 1) {  // centroid rule
    r.points = {{1.0 / 3, 1.0 / 3}};
    r.weights = {0.5};
    return r;
  }

  // Conical product rule: x = xi (Gauss-Jacobi with weight 1-xi), y = eta(1-xi).
  std::vector<double> xj, wj, xl, wl;
  jacobi10(n, xj, wj);
  for (int i = 0; i < n; ++i) {
    xj[i] = 0.5 * (xj[i] + 1.0);
    wj[i] *= 0.25;  // affine map of node and of the weight (1-x)dx
  }
  gauss_legendre_01(n, xl, wl);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.points.emplace_back(xj[i], xl[j] * (1.0 - xj[i]));
      r.weights.push_back(wj[i] * wl[j]);
    }
  return r;
}

}  // namespace msmfe
