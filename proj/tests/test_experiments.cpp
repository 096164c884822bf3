#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vemlab/experiments.hpp"

using namespace vemlab;

namespace {

// Two-stage finite-difference check: the gradient from u, then f from the gradient.
void check_solution(const ExactSolution& s, double tol) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const Point p(uni(rng), uni(rng));
    const Point ex(h, 0), ey(0, h);
    const double gx = (s.u(p + ex) - s.u(p - ex)) / (2 * h);
    const double gy = (s.u(p + ey) - s.u(p - ey)) / (2 * h);
    CHECK(std::abs(gx - s.grad(p).x()) <= tol * std::max(1.0, std::abs(gx)));
    CHECK(std::abs(gy - s.grad(p).y()) <= tol * std::max(1.0, std::abs(gy)));
    const double lap =
        (s.grad(p + ex).x() - s.grad(p - ex).x()) / (2 * h) + (s.grad(p + ey).y() - s.grad(p - ey).y()) / (2 * h);
    CHECK(std::abs(-lap - s.f(p)) <= tol * std::max(1.0, std::abs(lap)));
  }
}

ExperimentConfig conv_config(MeshFamily fam, int k, const std::string& sol, int levels) {
  ExperimentConfig c;
  c.command = "convergence";
  c.gen.family = fam;
  c.k = k;
  c.solution = sol;
  c.levels = levels;
  return c;
}

}  // namespace

TEST_CASE("manufactured solutions are consistent") {
  check_solution(paper_solution(), 1e-6);
  for (int d : {0, 1, 3, 6}) check_solution(polynomial_solution(d), 1e-6);
  const auto s = paper_solution();
  CHECK(s.u(Point(0, 0)) == doctest::Approx(-1.0));
  CHECK(parse_solution("poly:4").degree == 4);
  CHECK_THROWS_AS(parse_solution("custom"), std::invalid_argument);
  CHECK_THROWS_AS(parse_solution("poly:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_solution("poly:2x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_solution("poly:13"), std::invalid_argument);
  CHECK_THROWS_AS(parse_solution("sine"), std::invalid_argument);
}

TEST_CASE("square refinement gives first order in H1 for k = 1") {
  const auto rows = run_convergence(conv_config(MeshFamily::square, 1, "paper6", -1));
  REQUIRE(rows.size() == 4);
  CHECK(!rows[0].rate);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].rate);
    CHECK(*rows[i].rate > 0.9);
    CHECK(*rows[i].rate < 1.2);
    CHECK(rows[i].h < rows[i - 1].h);
  }
}

TEST_CASE("patch solutions are exact") {
  for (int k = 1; k <= 3; ++k) {
    const auto rows = run_convergence(conv_config(MeshFamily::hexagon, k, "poly:" + std::to_string(k), 1));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].h1_error <= 1e-9);
    CHECK(rows[0].l2_error <= 1e-9);
  }
}

TEST_CASE("CSV output is deterministic") {
  auto c = conv_config(MeshFamily::voronoi, 2, "paper6", 1);
  c.gen.n = 25;
  c.gen.seed = 7;
  std::ostringstream a, b;
  write_csv(a, c, run_convergence(c));
  write_csv(b, c, run_convergence(c));
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vemlab convergence");
  std::getline(in, line);
  CHECK(line.rfind("# build: ", 0) == 0);
  std::getline(in, line);
  CHECK(line.find("family=voronoi") != std::string::npos);
  CHECK(line.find("seed=7") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "family,level,h,dofs,h1_error,l2_error,rate");
  std::getline(in, line);
  CHECK(line.rfind("voronoi,0,", 0) == 0);
  CHECK(line.back() == ',');
}

TEST_CASE("refinement sequences") {
  CHECK(refinement_sequence(MeshFamily::square, 1).size() == 4);
  CHECK(refinement_sequence(MeshFamily::hexagon, 1).size() == 5);
  CHECK(refinement_sequence(MeshFamily::glued, 1).back().nx == 53);
  for (auto f : {MeshFamily::square, MeshFamily::hexagon, MeshFamily::voronoi, MeshFamily::lloyd, MeshFamily::glued,
                 MeshFamily::edge_split})
    for (const auto& g : refinement_sequence(f, 3)) CHECK_NOTHROW(g.validate());
}

TEST_CASE("small-edge experiment on the glued mesh") {
  ExperimentConfig c;
  c.command = "small-edge";
  c.gen.family = MeshFamily::glued;
  c.gen.nx = 53;
  c.gen.ny = 58;
  const auto rows = run_small_edge(c);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.cg_iterations > 0);
    CHECK(std::isfinite(r.oscillation));
    CHECK(r.h1_error < 0.3);
  }
  // identity at k = 1 oscillates more than the down-weighted tangential form
  CHECK(rows[0].stab == "identity");
  CHECK(rows[2].stab == "tangential");
  CHECK(rows[2].tau == 0.1);
  CHECK(rows[0].oscillation > rows[2].oscillation);
  // k = 2 errors are far smaller in energy
  CHECK(rows[3].h1_error < 0.1 * rows[0].h1_error);

  std::ostringstream os;
  write_csv(os, c, rows);
  CHECK(os.str().find("stab,tau,k,oscillation_metric,h1_error,cg_iterations\nidentity,1,1,") != std::string::npos);
}

TEST_CASE("stability sweep") {
  ExperimentConfig c;
  c.command = "stab-sweep";
  c.gen.family = MeshFamily::edge_split;
  const auto rows = run_stability_sweep(c);
  REQUIRE(rows.size() == 3 * (1 + sweep_eps().size()));

  auto pick = [&](const std::string& stab) {
    std::vector<SweepRow> out;
    for (const auto& r : rows)
      if (r.stab == stab) out.push_back(r);
    return out;
  };
  const auto tan = pick("tangential");
  const auto id = pick("identity");
  double lo = 1e300, hi = 0.0;
  for (const auto& r : tan) {
    lo = std::min(lo, r.c2);
    hi = std::max(hi, r.c2);
  }
  CHECK(hi / lo <= 1.5);
  // C2 of the identity form stays bounded; the H^1/2 ratio grows like the log factor
  const double ref = id[3].h12_ratio / id[3].log_factor;
  CHECK(id[3].eps == 1e-2);
  for (std::size_t i = 3; i < id.size(); ++i) {
    const double q = id[i].h12_ratio / id[i].log_factor;
    CHECK(q <= 2 * ref);
    CHECK(q >= 0.5 * ref);
  }
  // a split at the midpoint leaves the constants within 20% of the unsplit square
  CHECK(id[1].eps == 0.5);
  CHECK(std::abs(id[1].c2 / id[0].c2 - 1) <= 0.2 + 1e-12);
  CHECK(std::abs(tan[1].c2 / tan[0].c2 - 1) <= 0.2);

  c.k = 4;
  const auto k4 = run_stability_sweep(c);
  CHECK(k4.size() == rows.size());
  CHECK(k4[0].k == 4);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.command = "convergence";
  CHECK_NOTHROW(c.validate());
  c.k = 6;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.k = 1;
  c.stab.tau = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.stab.tau = 1;
  c.stab.r_operator = ROperator::cell_mean;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.stab.r_operator = ROperator::vertex_mean;
  c.levels = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.levels = 2;
  c.solution = "bogus";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.solution = "paper6";
  CHECK(c.describe().find("levels=2") != std::string::npos);
  CHECK(!build_id().empty());
}
