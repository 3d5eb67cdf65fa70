#pragma once

#include <Eigen/Dense>

namespace xg {

/// Quadrature rule on a reference domain (unit triangle or unit segment).
/// Points are reference coordinates; weights sum to the reference measure.
struct QuadRule {
  Eigen::MatrixXd points;   // npts x dim (dim = 2 for triangle, 1 for edge)
  Eigen::VectorXd weights;  // npts
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

// Maximum exactness degrees the factory functions support.
inline constexpr int kMaxTriangleDegree = 50;
inline constexpr int kMaxEdgeDegree = 63;

/// Gauss-Legendre rule on [0,1], exact for polynomials of the requested degree.
QuadRule quad_edge(int exactness_degree);

/// Rule on the reference triangle {x,y >= 0, x+y <= 1}, exact to the requested
/// degree. Built as a collapsed tensor Gauss rule; all weights positive.
QuadRule quad_triangle(int exactness_degree);

/// Exact value of the monomial integral over the reference triangle,
/// int x^a y^b dx dy = a! b! / (a+b+2)!.
double triangle_monomial_integral(int a, int b);

}  // namespace xg
