#include <doctest.h>

#include <cmath>

#include "vemlab/diagnostics.hpp"
#include "vemlab/experiments.hpp"
#include "vemlab/meshgen.hpp"
#include "vemlab/quadrature.hpp"

using namespace vemlab;

namespace {

ElementGeometry unit_square() { return polygon_geometry({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// Piecewise-linear closed curve with values at the vertices.
struct PlCurve {
  std::vector<Point> v;
  std::vector<double> val;
};

// Midpoint-rule double sum of int int (v(x)-v(y))^2/|x-y|^2 with m points per
// edge; the integrand is bounded for Lipschitz traces so dropping the diagonal
// only costs O(1/m).
double midpoint_h12(const PlCurve& c, int m) {
  std::vector<Point> pts;
  std::vector<double> vals, wts;
  const std::size_t n = c.v.size();
  for (std::size_t e = 0; e < n; ++e) {
    const Point a = c.v[e], b = c.v[(e + 1) % n];
    const double len = (b - a).norm();
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) / m;
      pts.push_back(a + t * (b - a));
      vals.push_back((1 - t) * c.val[e] + t * c.val[(e + 1) % n]);
      wts.push_back(len / m);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double d = vals[i] - vals[j];
      s += wts[i] * wts[j] * d * d / (pts[i] - pts[j]).squaredNorm();
    }
  return s;
}

BoundaryTraces linear_trace(const PlCurve& c) {
  BoundaryTraces t;
  t.vertices = c.v;
  t.order = 1;
  const std::size_t n = c.v.size();
  for (std::size_t e = 0; e < n; ++e) {
    Eigen::MatrixXd row(1, 2);
    row << c.val[e], c.val[(e + 1) % n];
    t.edge_values.push_back(row);
  }
  return t;
}

}  // namespace

TEST_CASE("H1 error of polynomial interpolants vanishes") {
  for (int k = 1; k <= 4; ++k) {
    const auto sol = polynomial_solution(k);
    for (const auto& m : {gen_square(3), gen_voronoi(20, 3, 5)}) {
      const Eigen::VectorXd ui = interpolate_global(m, k, sol.u);
      CHECK(h1_error(m, k, ui, sol.grad) <= 1e-10);
      CHECK(l2_error(m, k, ui, sol.u) <= 1e-10);
    }
  }
}

TEST_CASE("H1 error of the zero function is the seminorm of u") {
  const auto sol = paper_solution();
  // independent value: composite 8-point Gauss on a 32 x 32 grid
  const auto& g = gauss_legendre(8);
  double oracle = 0.0;
  const int cells = 32;
  const double hh = 1.0 / cells;
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j)
      for (int a = 0; a < g.size(); ++a)
        for (int b = 0; b < g.size(); ++b) {
          const Point p((i + 0.5 * (g.nodes[a] + 1)) * hh, (j + 0.5 * (g.nodes[b] + 1)) * hh);
          oracle += 0.25 * hh * hh * g.weights[a] * g.weights[b] * sol.grad(p).squaredNorm();
        }
  CHECK(oracle == doctest::Approx(27.05606343479508).epsilon(1e-10));

  const auto m = gen_square(4);
  for (int k = 1; k <= 3; ++k) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(GlobalDofMap(m, k).size());
    CHECK(h1_error(m, k, zero, sol.grad) == doctest::Approx(std::sqrt(27.05606343479508)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(h1_error(m, 2, Eigen::VectorXd::Zero(5), sol.grad), std::invalid_argument);
}

TEST_CASE("doubling the interpolant increases the error") {
  const auto sol = paper_solution();
  const auto m = gen_square(8);
  const Eigen::VectorXd ui = interpolate_global(m, 2, sol.u);
  const Eigen::VectorXd twice = 2.0 * ui;
  CHECK(h1_error(m, 2, twice, sol.grad) > h1_error(m, 2, ui, sol.grad));
  const auto rep = error_report(m, 2, ui, sol.u, sol.grad);
  CHECK(rep.num_dofs == GlobalDofMap(m, 2).size());
  CHECK(rep.mean_diameter == doctest::Approx(std::sqrt(2.0) / 8));
  CHECK(rep.h1_error == doctest::Approx(h1_error(m, 2, ui, sol.grad)));
}

TEST_CASE("convergence rates") {
  const auto r = convergence_rate({1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(convergence_rate({0.1, 0.0}, {0.2, 0.1})[0] == kInfiniteRate);
  CHECK(convergence_rate({1.0, 0.5}, {0.3, 0.1})[0] == doctest::Approx(std::log(2.0) / std::log(3.0)));
  CHECK_THROWS_AS(convergence_rate({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_rate({1.0, 0.5}, {0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_rate({1.0, -0.5}, {0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_rate({1.0, 0.5, 0.1}, {0.2, 0.1}), std::invalid_argument);
}

TEST_CASE("stability probe on the unit square") {
  const LocalSpace sp(unit_square(), 1);
  StabChoice id;
  const auto a = c2_probe(sp, id);
  CHECK(a.c2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(a.residual <= 1e-8);

  StabChoice tan;
  tan.boundary = BoundaryStab::tangential;
  CHECK(c2_probe(sp, tan).c2 == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-10));
  // scales with tau but not with K (both sides carry K)
  tan.tau = 0.5;
  CHECK(c2_probe(sp, tan, 7.0).c2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

  StabChoice mom = id;
  mom.internal = InternalStab::moments;
  CHECK(c2_probe(sp, mom).c2 == doctest::Approx(a.c2).epsilon(1e-12));
}

TEST_CASE("tangential probe is insensitive to a split edge") {
  StabChoice tan;
  tan.boundary = BoundaryStab::tangential;
  double lo = 1e300, hi = 0.0;
  for (double eps : {0.5, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8}) {
    const LocalSpace sp(split_square_geometry(eps), 1);
    const double c = c2_probe(sp, tan).c2;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(hi / lo < 1.1);
}

TEST_CASE("probe works for higher order with every R") {
  for (int k = 2; k <= 3; ++k) {
    const LocalSpace sp(polygon_geometry({{0, 0}, {1, 0}, {1.2, 0.8}, {0.4, 1.1}, {-0.1, 0.5}}), k);
    for (auto r : {ROperator::cell_mean, ROperator::boundary_mean, ROperator::vertex_mean}) {
      StabChoice s;
      s.r_operator = r;
      s.internal = InternalStab::moments;
      const auto p = c2_probe(sp, s);
      CHECK(p.c2 > 0.0);
      CHECK(std::isfinite(p.c2));
      CHECK(p.residual <= 1e-8);
    }
  }
}

TEST_CASE("H^1/2 seminorm of constants vanishes") {
  const LocalSpace sp(unit_square(), 2);
  const Eigen::VectorXd ones = sp.polynomial_dofs().col(0);
  CHECK(std::abs(h12_seminorm(trace_from_dofs(sp, ones))) <= 1e-13);
  const Eigen::MatrixXd g = h12_gram(nodal_boundary_basis(sp));
  CHECK((g * Eigen::VectorXd::Ones(g.rows())).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("H^1/2 seminorm of v = x on the unit square against a midpoint double sum") {
  const PlCurve c{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0, 1, 1, 0}};
  const double oracle = midpoint_h12(c, 1000);
  const double got = h12_seminorm(linear_trace(c));
  CHECK(got == doctest::Approx(oracle).epsilon(5e-3));

  // higher-order traces of the same function agree
  for (int k = 2; k <= 4; ++k) {
    const LocalSpace sp(unit_square(), k);
    const Eigen::VectorXd vx = sp.polynomial_dofs().col(1) * sp.basis().scale();
    CHECK(h12_seminorm(trace_from_dofs(sp, vx)) == doctest::Approx(got).epsilon(1e-10));
  }
}

TEST_CASE("H^1/2 seminorm: homogeneity, rigid motions, nonnegativity") {
  const std::vector<Point> poly{{0.1, 0.0}, {0.9, 0.2}, {1.0, 0.8}, {0.4, 1.1}, {0.0, 0.6}};
  const std::vector<double> vals{0.3, -1.0, 2.0, 0.5, -0.2};
  const double base = h12_seminorm(linear_trace({poly, vals}));
  CHECK(base > 0.0);

  std::vector<double> scaled;
  for (double v : vals) scaled.push_back(-2.5 * v);
  CHECK(h12_seminorm(linear_trace({poly, scaled})) == doctest::Approx(6.25 * base).epsilon(1e-12));

  const double th = 0.7;
  std::vector<Point> moved;
  for (const auto& p : poly)
    moved.emplace_back(std::cos(th) * p.x() - std::sin(th) * p.y() + 3.0, std::sin(th) * p.x() + std::cos(th) * p.y() - 1.0);
  CHECK(std::abs(h12_seminorm(linear_trace({moved, vals})) - base) <= 1e-9 * base);

  // the seminorm is invariant under dilation in 2D
  std::vector<Point> big;
  for (const auto& p : poly) big.push_back(4.0 * p);
  CHECK(std::abs(h12_seminorm(linear_trace({big, vals})) - base) <= 1e-9 * base);

  const LocalSpace sp(polygon_geometry(poly), 2);
  const Eigen::MatrixXd g = h12_gram(nodal_boundary_basis(sp));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  CHECK(es.eigenvalues().minCoeff() >= -1e-11 * es.eigenvalues().maxCoeff());
}

TEST_CASE("discontinuous traces are rejected") {
  auto t = linear_trace({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0, 1, 1, 0}});
  t.edge_values[1](0, 0) = 0.5;
  CHECK_THROWS_AS(h12_seminorm(t), std::invalid_argument);
}

TEST_CASE("L-infinity ratio against brute force over sign patterns") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  double best = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<double> s{1.0};
    for (int b = 0; b < 3; ++b) s.push_back((mask >> b) & 1 ? -1.0 : 1.0);
    best = std::max(best, midpoint_h12({sq, s}, 400));
  }
  CHECK(h12_linf_ratio(unit_square(), 1) == doctest::Approx(best).epsilon(2e-2));
}

TEST_CASE("log bound table") {
  const auto rows = log_bound_check({0.5, 1e-2, 1e-4}, 1);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].eps == 0.0);
  CHECK(rows[0].log_factor == doctest::Approx(std::log(1.0 + std::sqrt(2.0))));
  CHECK(rows[1].log_factor == doctest::Approx(std::log(1.0 + 2.0 * std::sqrt(2.0))));
  for (const auto& r : rows) CHECK(r.normalized == doctest::Approx(r.ratio / r.log_factor));
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(rows[i].ratio > rows[i - 1].ratio);
  CHECK_THROWS_AS(log_bound_check({0.6}, 1), std::invalid_argument);
  CHECK_THROWS_AS(log_bound_check({0.0}, 1), std::invalid_argument);
  CHECK(split_square_geometry(0.25).num_edges() == 5);
}

TEST_CASE("section sampling reproduces affine functions") {
  auto u = [](const Point& p) { return 1.0 + 2.0 * p.x() - 3.0 * p.y(); };
  for (int k = 1; k <= 3; ++k) {
    const auto m = gen_voronoi(30, 8, 4);
    const Eigen::VectorXd ui = interpolate_global(m, k, u);
    const auto samples = section_sample(m, k, ui, 0.37, 101);
    REQUIRE(samples.size() == 101);
    CHECK(oscillation_metric(samples, u, 0.37) <= 1e-10);

    const auto ends = section_sample(m, k, ui, 0.37, 2);
    CHECK(ends[0].y == 0.0);
    CHECK(ends[1].y == 1.0);
    CHECK(ends[0].on_edge);
  }
  const auto m = gen_square(4);
  const Eigen::VectorXd ui = interpolate_global(m, 2, u);
  for (const auto& s : section_sample(m, 2, ui, 0.5, 17)) {
    CHECK(s.on_edge);
    CHECK(s.value == doctest::Approx(u(Point(0.5, s.y))));
  }
  CHECK(section_sample(m, 2, ui, 0.3, 1)[0].y == 0.5);
  CHECK_THROWS_AS(section_sample(m, 2, ui, 1.5, 3), std::invalid_argument);
}
