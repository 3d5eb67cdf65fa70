#include "xg/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace xg {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
// Extended precision keeps the node error below double rounding, which
// matters when the rule is applied to polynomials with large gradients.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    long double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        long double p2 = p1;
        p1 = p0;
        p0 = ((2.0L * j + 1.0L) * z * p1 - j * p2) / (j + 1.0L);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0L);
      long double dz = p0 / pp;
      z -= dz;
      if (std::abs(static_cast<double>(dz)) < 1e-19) break;
    }
    x[i] = static_cast<double>(-z);
    x[n - 1 - i] = static_cast<double>(z);
    w[i] = static_cast<double>(2.0L / ((1.0L - z * z) * pp * pp));
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

QuadRule quad_edge(int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > kMaxEdgeDegree)
    throw std::invalid_argument("quad_edge: unsupported exactness degree");
  int n = exactness_degree / 2 + 1;  // n points exact to degree 2n-1
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRule rule;
  rule.points.resize(n, 1);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.points(i, 0) = 0.5 * (x[i] + 1.0);
    rule.weights(i) = 0.5 * w[i];
  }
  rule.exactness = 2 * n - 1;
  return rule;
}

QuadRule quad_triangle(int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > kMaxTriangleDegree)
    throw std::invalid_argument("quad_triangle: unsupported exactness degree");
  // Duffy map (u,v) -> (u, v(1-u)); a total-degree-d integrand becomes degree
  // d+1 in u and d in v, so m Gauss points per direction need 2m-1 >= d+1.
  int m = (exactness_degree + 2) / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(m, x, w);
  QuadRule rule;
  rule.points.resize(m * m, 2);
  rule.weights.resize(m * m);
  int idx = 0;
  for (int i = 0; i < m; ++i) {
    double u = 0.5 * (x[i] + 1.0), wu = 0.5 * w[i];
    for (int j = 0; j < m; ++j) {
      double v = 0.5 * (x[j] + 1.0), wv = 0.5 * w[j];
      rule.points(idx, 0) = u;
      rule.points(idx, 1) = v * (1.0 - u);
      rule.weights(idx) = wu * wv * (1.0 - u);
      ++idx;
    }
  }
  rule.exactness = 2 * m - 2;
  return rule;
}

double triangle_monomial_integral(int a, int b) {
  // a! b! / (a+b+2)! computed as a running product to avoid overflow.
  double val = 1.0;
  // 1/( (a+1)(a+2)...(a+b+2) ) * b! interleaved
  for (int i = 1; i <= b; ++i) val *= static_cast<double>(i);
  for (int i = a + 1; i <= a + b + 2; ++i) val /= static_cast<double>(i);
  return val;
}

}  // namespace xg
