#include <doctest.h>

#include <random>

#include "xg/quadrature.hpp"

using namespace xg;

namespace {
double integrate_tri(const QuadRule& r, int a, int b) {
  double s = 0.0;
  for (int q = 0; q < r.size(); ++q)
    s += r.weights(q) * std::pow(r.points(q, 0), a) * std::pow(r.points(q, 1), b);
  return s;
}
}  // namespace

TEST_CASE("triangle rule integrates monomials exactly") {
  for (int deg : {2, 5, 10, 20}) {
    QuadRule r = quad_triangle(deg);
    CHECK(r.weights.minCoeff() > 0.0);
    CHECK(r.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        CHECK(integrate_tri(r, a, b) ==
              doctest::Approx(triangle_monomial_integral(a, b)).epsilon(1e-12));
  }
  // spot values from the closed form
  CHECK(integrate_tri(quad_triangle(2), 1, 1) == doctest::Approx(1.0 / 24).epsilon(1e-14));
  CHECK(integrate_tri(quad_triangle(5), 5, 0) == doctest::Approx(1.0 / 42).epsilon(1e-13));
}

TEST_CASE("edge rule integrates monomials on [0,1]") {
  for (int deg : {0, 3, 15, 30}) {
    QuadRule r = quad_edge(deg);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= deg; ++a) {
      double s = 0.0;
      for (int q = 0; q < r.size(); ++q)
        s += r.weights(q) * std::pow(r.points(q, 0), a);
      CHECK(s == doctest::Approx(1.0 / (a + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("rules of different exactness agree on random polynomials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    int pdeg = 4;
    std::vector<double> c;
    for (int i = 0; i < (pdeg + 1) * (pdeg + 2) / 2; ++i) c.push_back(coef(rng));
    auto eval = [&](double x, double y) {
      double s = 0.0;
      int idx = 0;
      for (int d = 0; d <= pdeg; ++d)
        for (int a = d; a >= 0; --a)
          s += c[idx++] * std::pow(x, a) * std::pow(y, d - a);
      return s;
    };
    double v1 = 0.0, v2 = 0.0;
    QuadRule r1 = quad_triangle(pdeg), r2 = quad_triangle(pdeg + 7);
    for (int q = 0; q < r1.size(); ++q)
      v1 += r1.weights(q) * eval(r1.points(q, 0), r1.points(q, 1));
    for (int q = 0; q < r2.size(); ++q)
      v2 += r2.weights(q) * eval(r2.points(q, 0), r2.points(q, 1));
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-13));
  }
}

TEST_CASE("unsupported degrees rejected") {
  CHECK_THROWS(quad_triangle(kMaxTriangleDegree + 1));
  CHECK_THROWS(quad_edge(kMaxEdgeDegree + 1));
  CHECK_THROWS(quad_triangle(-1));
}
