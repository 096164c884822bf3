#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "vemlab/mesh.hpp"
#include "vemlab/quadrature.hpp"

using namespace vemlab;

namespace {

double integrate_1d(const QuadRule1D& r, int d) {
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
  return s;
}

double exact_1d(int d) { return d % 2 ? 0.0 : 2.0 / (d + 1); }

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// int_T x^a y^b over a triangle: expand x, y in barycentric coordinates and use
// int_T l1^i l2^j l3^m = 2|T| i! j! m! / (i+j+m+2)!.
double triangle_monomial(const Point& p0, const Point& p1, const Point& p2, int a, int b) {
  using Key = std::tuple<int, int, int>;
  std::map<Key, double> poly{{{0, 0, 0}, 1.0}};
  auto times_linear = [&](double c0, double c1, double c2) {
    std::map<Key, double> out;
    for (const auto& [k, v] : poly) {
      const auto [i, j, m] = k;
      out[{i + 1, j, m}] += v * c0;
      out[{i, j + 1, m}] += v * c1;
      out[{i, j, m + 1}] += v * c2;
    }
    poly = std::move(out);
  };
  for (int i = 0; i < a; ++i) times_linear(p0.x(), p1.x(), p2.x());
  for (int i = 0; i < b; ++i) times_linear(p0.y(), p1.y(), p2.y());
  const double area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  double s = 0.0;
  for (const auto& [k, v] : poly) {
    const auto [i, j, m] = k;
    s += v * 2.0 * area * factorial(i) * factorial(j) * factorial(m) / factorial(i + j + m + 2);
  }
  return s;
}

// Fan from vertex 0, so the oracle never shares the centroid fan.
double polygon_monomial(const std::vector<Point>& poly, int a, int b) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) s += triangle_monomial(poly[0], poly[i], poly[i + 1], a, b);
  return s;
}

double apply(const QuadRule2D& r, int a, int b) {
  double s = 0.0;
  for (int q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
  return s;
}

std::vector<Point> regular_polygon(int n, double radius, Point center = Point::Zero()) {
  std::vector<Point> p;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    p.emplace_back(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
  }
  return p;
}

bool inside_closed(const std::vector<Point>& poly, const Point& x) {
  // convex polygons only
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point e = poly[(i + 1) % poly.size()] - poly[i];
    const Point d = x - poly[i];
    if (e.x() * d.y() - e.y() * d.x() < -1e-14) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("gauss-legendre closed forms") {
  const auto& g1 = gauss_legendre(1);
  REQUIRE(g1.size() == 1);
  CHECK(g1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g1.weights[0] == doctest::Approx(2.0));

  const auto& g2 = gauss_legendre(2);
  CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g2.weights[0] == doctest::Approx(1.0));
  CHECK(g2.weights[1] == doctest::Approx(1.0));

  CHECK(std::abs(integrate_1d(gauss_legendre(5), 8) - 2.0 / 9.0) <= 1e-14);
}

TEST_CASE("gauss-legendre exactness sweep and invariants") {
  for (int n = 1; n <= 32; ++n) {
    const auto& r = gauss_legendre(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      wsum += r.weights[i];
      CHECK(r.weights[i] > 0.0);
      if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK(std::abs(wsum - 2.0) <= 1e-14);
    for (int d = 0; d <= 2 * n - 1; ++d) CHECK(std::abs(integrate_1d(r, d) - exact_1d(d)) <= 1e-12);
  }
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(33), std::invalid_argument);
}

TEST_CASE("gauss-lobatto closed forms") {
  const auto& l2 = gauss_lobatto(2);
  CHECK(l2.nodes[0] == -1.0);
  CHECK(l2.nodes[1] == 1.0);
  CHECK(l2.weights[0] == doctest::Approx(1.0));
  CHECK(l2.weights[1] == doctest::Approx(1.0));

  const auto& l3 = gauss_lobatto(3);
  CHECK(l3.nodes[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(l3.weights[0] == doctest::Approx(1.0 / 3.0));
  CHECK(l3.weights[1] == doctest::Approx(4.0 / 3.0));
  CHECK(l3.weights[2] == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(gauss_lobatto(1), std::invalid_argument);
}

TEST_CASE("gauss-lobatto interior nodes match bisection roots of P3'") {
  // P3'(x) = (15 x^2 - 3) / 2, positive root by bisection on [0.1, 0.9]
  auto dp3 = [](double x) { return 0.5 * (15.0 * x * x - 3.0); };
  double lo = 0.1, hi = 0.9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dp3(lo) < 0.0) == (dp3(mid) < 0.0) ? lo = mid : hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  const auto& l4 = gauss_lobatto(4);
  CHECK(std::abs(l4.nodes[1] + root) <= 1e-14);
  CHECK(std::abs(l4.nodes[2] - root) <= 1e-14);
  CHECK(std::abs(root - 1.0 / std::sqrt(5.0)) <= 1e-14);
}

TEST_CASE("gauss-lobatto exactness sweep") {
  for (int n = 2; n <= 16; ++n) {
    const auto& r = gauss_lobatto(n);
    CHECK(r.nodes.front() == -1.0);
    CHECK(r.nodes.back() == 1.0);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(std::abs(wsum - 2.0) <= 1e-14);
    for (int d = 0; d <= 2 * n - 3; ++d) CHECK(std::abs(integrate_1d(r, d) - exact_1d(d)) <= 1e-12);
  }
}

TEST_CASE("legendre recurrence") {
  double p = 0.0, dp = 0.0;
  legendre(3, 0.3, p, dp);
  CHECK(p == doctest::Approx(0.5 * (5 * 0.027 - 0.9)));
  CHECK(dp == doctest::Approx(0.5 * (15 * 0.09 - 3.0)));
}

TEST_CASE("polygon rule on the unit square") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto geom = polygon_geometry(sq);
  for (int deg = 0; deg <= 10; ++deg) {
    const auto r = polygon_rule(geom, deg);
    CHECK(apply(r, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    if (deg >= 4) CHECK(std::abs(apply(r, 2, 2) - 1.0 / 9.0) <= 1e-13);
  }
}

TEST_CASE("polygon rule on a regular hexagon") {
  const auto hex = regular_polygon(6, 1.0);
  const auto r = polygon_rule(polygon_geometry(hex), 2);
  CHECK(std::abs(apply(r, 0, 0) - 1.5 * std::sqrt(3.0)) <= 1e-12);
}

TEST_CASE("polygon rule exactness sweep against triangle closed forms") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<std::vector<Point>> polys;
  polys.push_back({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  polys.push_back({{0, 0}, {1e-3, 0}, {1, 0}, {1, 1}, {0, 1}});
  for (int n = 3; n <= 9; ++n) {
    auto p = regular_polygon(n, 0.4 + 0.1 * n, Point(u(rng), u(rng)));
    polys.push_back(std::move(p));
  }
  for (const auto& poly : polys) {
    const auto geom = polygon_geometry(poly);
    for (int deg = 0; deg <= 12; ++deg) {
      const auto r = polygon_rule(geom, deg);
      double wsum = 0.0;
      for (int q = 0; q < r.size(); ++q) {
        CHECK(r.weights[q] > 0.0);
        CHECK(inside_closed(poly, r.points[q]));
        wsum += r.weights[q];
      }
      CHECK(std::abs(wsum - geom.area) <= 1e-12 * geom.area);
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) {
          const double exact = polygon_monomial(poly, a, b);
          CHECK(std::abs(apply(r, a, b) - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
  }
}

TEST_CASE("polygon rule rejects cells not star-shaped about the centroid") {
  // U shape whose centroid falls in the notch
  const std::vector<Point> u{{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}};
  const auto geom = polygon_geometry(u);
  CHECK_THROWS_AS(polygon_rule(geom, 2), MeshError);
}
