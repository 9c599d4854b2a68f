#pragma once

#include <Eigen/Dense>
#include <vector>

#include "msmfe/mesh.hpp"

namespace msmfe {

struct QuadratureRule {
  enum class Kind { vertex, gauss };
  Kind kind;
  int order = 0;  // polynomial exactness for gauss rules
  CellType cell;
  std::vector<Eigen::Vector2d> points;  // reference coordinates
  std::vector<double> weights;          // reference weights (J enters at assembly)
};

/// Element-vertex rule: points at the reference vertices, weight |Ê|/s each.
QuadratureRule vertex_rule(CellType cell);

/// Gauss rule exact for polynomials of total degree <= order (triangles)
/// or degree <= order per variable (squares). Supported up to order 9.
QuadratureRule gauss_rule(CellType cell, int order);

/// 1D Gauss-Legendre rule on [0,1], exact to degree 2n-1.
void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights);

}  // namespace msmfe
