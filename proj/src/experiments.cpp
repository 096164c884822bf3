#include "vemlab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifndef VEMLAB_BUILD_ID
#define VEMLAB_BUILD_ID "unknown"
#endif

namespace vemlab {

ExactSolution paper_solution() {
  ExactSolution s;
  s.name = "paper6";
  s.u = [](const Point& p) {
    const double x = p.x(), y = p.y();
    return x * x * x - x * y * y + x * x * y + x * x - x * y - x + y - 1.0 + std::sin(5 * x) * std::sin(7 * y) +
           std::log(1.0 + x * x + y * y * y * y);
  };
  s.grad = [](const Point& p) {
    const double x = p.x(), y = p.y();
    const double q = 1.0 + x * x + y * y * y * y;
    return Point(3 * x * x - y * y + 2 * x * y + 2 * x - y - 1.0 + 5 * std::cos(5 * x) * std::sin(7 * y) + 2 * x / q,
                 -2 * x * y + x * x - x + 1.0 + 7 * std::sin(5 * x) * std::cos(7 * y) + 4 * y * y * y / q);
  };
  s.f = [](const Point& p) {
    const double x = p.x(), y = p.y();
    const double q = 1.0 + x * x + y * y * y * y;
    const double y2 = y * y, y6 = y2 * y2 * y2;
    const double lap = 4 * x + 2 * y + 2.0 - 74.0 * std::sin(5 * x) * std::sin(7 * y) + 2.0 / q -
                       4 * x * x / (q * q) + 12 * y2 / q - 16 * y6 / (q * q);
    return -lap;
  };
  return s;
}

ExactSolution polynomial_solution(int d) {
  if (d < 0 || d > 12) throw std::invalid_argument("poly solution degree must lie in [0, 12]");
  struct Term {
    int a, b;
    double c;
  };
  std::vector<Term> terms;
  for (int deg = 0; deg <= d; ++deg)
    for (int b = 0; b <= deg; ++b) {
      const int a = deg - b;
      terms.push_back({a, b, ((a + b) % 2 ? -1.0 : 1.0) / (1.0 + a + 2.0 * b)});
    }
  auto mono = [](double x, int a) { return a < 0 ? 0.0 : std::pow(x, a); };
  ExactSolution s;
  s.name = "poly:" + std::to_string(d);
  s.degree = d;
  s.u = [terms, mono](const Point& p) {
    double v = 0.0;
    for (const auto& t : terms) v += t.c * mono(p.x(), t.a) * mono(p.y(), t.b);
    return v;
  };
  s.grad = [terms, mono](const Point& p) {
    Point g = Point::Zero();
    for (const auto& t : terms) {
      g.x() += t.c * t.a * mono(p.x(), t.a - 1) * mono(p.y(), t.b);
      g.y() += t.c * t.b * mono(p.x(), t.a) * mono(p.y(), t.b - 1);
    }
    return g;
  };
  s.f = [terms, mono](const Point& p) {
    double lap = 0.0;
    for (const auto& t : terms) {
      lap += t.c * t.a * (t.a - 1) * mono(p.x(), t.a - 2) * mono(p.y(), t.b);
      lap += t.c * t.b * (t.b - 1) * mono(p.x(), t.a) * mono(p.y(), t.b - 2);
    }
    return -lap;
  };
  return s;
}

ExactSolution parse_solution(const std::string& spec) {
  if (spec == "paper6") return paper_solution();
  if (spec.rfind("poly:", 0) == 0) {
    const std::string deg = spec.substr(5);
    std::size_t pos = 0;
    int d = -1;
    try {
      d = std::stoi(deg, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != deg.size()) throw std::invalid_argument("bad polynomial solution '" + spec + "'");
    return polynomial_solution(d);
  }
  if (spec == "custom") throw std::invalid_argument("custom exact solutions are disabled");
  throw std::invalid_argument("unknown exact solution '" + spec + "' (expected paper6 or poly:<d>)");
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (k < 1 || k > 5) throw std::invalid_argument("k must lie in 1..5");
  stab.validate(k);
  if (mesh_path.empty()) gen.validate();
  if (levels == 0 || levels < -1) throw std::invalid_argument("levels must be positive");
  parse_solution(solution);
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string ExperimentConfig::describe() const {
  std::ostringstream os;
  os << "command=" << command << " k=" << k << " stab=" << to_string(stab.boundary)
     << " internal_stab=" << to_string(stab.internal) << " r_op=" << to_string(stab.r_operator)
     << " tau=" << short_num(stab.tau) << " solution=" << solution;
  if (!mesh_path.empty()) {
    os << " mesh=" << mesh_path;
  } else {
    os << " family=" << to_string(gen.family) << " n=" << gen.n << " nx=" << gen.nx << " ny=" << gen.ny
       << " lloyd_iters=" << gen.lloyd_iters << " eps=" << short_num(gen.eps) << " seed=" << gen.seed;
  }
  os << " levels=" << levels;
  return os.str();
}

SolveResult solve_problem(const PolyMesh& mesh, int k, const StabChoice& stab, const ExactSolution& sol,
                          const CellCoefficients& kappa) {
  const auto sys = assemble(mesh, k, stab, kappa, sol.f, sol.u);
  SolveResult res;
  res.uh = solve(sys, 1e-12, &res.stats);
  res.errors = error_report(mesh, k, res.uh, sol.u, sol.grad, stab.r_operator);
  return res;
}

std::vector<GenSpec> refinement_sequence(MeshFamily family, std::uint64_t seed) {
  std::vector<GenSpec> seq;
  GenSpec base;
  base.family = family;
  base.seed = seed;
  switch (family) {
    case MeshFamily::square:
      for (int n : {4, 8, 16, 32}) {
        base.n = n;
        seq.push_back(base);
      }
      break;
    case MeshFamily::hexagon:
      for (auto [nx, ny] : {std::pair{8, 10}, {18, 20}, {26, 30}, {34, 40}, {44, 50}}) {
        base.nx = nx;
        base.ny = ny;
        seq.push_back(base);
      }
      break;
    case MeshFamily::voronoi:
    case MeshFamily::lloyd:
      for (int n : {25, 100, 400, 1600}) {
        base.n = n;
        seq.push_back(base);
      }
      break;
    case MeshFamily::edge_split:
      for (int n : {4, 8, 16, 32}) {
        base.n = n;
        seq.push_back(base);
      }
      break;
    case MeshFamily::glued:
      for (auto [l, r] : {std::pair{13, 15}, {27, 29}, {53, 58}}) {
        base.nx = l;
        base.ny = r;
        seq.push_back(base);
      }
      break;
  }
  return seq;
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config) {
  config.validate();
  const ExactSolution sol = parse_solution(config.solution);
  std::vector<std::pair<std::string, PolyMesh>> meshes;
  if (!config.mesh_path.empty()) {
    meshes.emplace_back("file", load_mesh(config.mesh_path));
  } else {
    auto seq = refinement_sequence(config.gen.family, config.gen.seed);
    if (config.gen.family == MeshFamily::edge_split)
      for (auto& g : seq) g.eps = config.gen.eps;
    if (config.levels > 0 && static_cast<int>(seq.size()) > config.levels) seq.resize(config.levels);
    for (const auto& g : seq) meshes.emplace_back(to_string(g.family), generate(g));
  }
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const auto res = solve_problem(meshes[i].second, config.k, config.stab, sol);
    ConvergenceRow row;
    row.family = meshes[i].first;
    row.level = static_cast<int>(i);
    row.h = res.errors.mean_diameter;
    row.dofs = res.errors.num_dofs;
    row.h1_error = res.errors.h1_error;
    row.l2_error = res.errors.l2_error;
    if (i > 0) row.rate = convergence_rate({rows.back().h1_error, row.h1_error}, {rows.back().h, row.h})[0];
    rows.push_back(row);
  }
  return rows;
}

std::vector<SmallEdgeRow> run_small_edge(const ExperimentConfig& config) {
  config.validate();
  const ExactSolution sol = parse_solution(config.solution);
  const PolyMesh mesh = config.mesh_path.empty() ? generate(config.gen) : load_mesh(config.mesh_path);
  constexpr double kSection = 0.5;
  constexpr int kSamples = 10001;
  struct Variant {
    BoundaryStab stab;
    double tau;
  };
  const Variant variants[] = {{BoundaryStab::identity, 1.0}, {BoundaryStab::tangential, 1.0},
                              {BoundaryStab::tangential, 0.1}};
  std::vector<SmallEdgeRow> rows;
  for (int k : {1, 2}) {
    for (const auto& v : variants) {
      StabChoice choice = config.stab;
      choice.boundary = v.stab;
      choice.tau = v.tau;
      if (choice.r_operator == ROperator::cell_mean && k == 1) choice.r_operator = ROperator::vertex_mean;
      const auto res = solve_problem(mesh, k, choice, sol);
      const auto samples = section_sample(mesh, k, res.uh, kSection, kSamples, choice.r_operator);
      SmallEdgeRow row;
      row.stab = to_string(v.stab);
      row.tau = v.tau;
      row.k = k;
      row.oscillation = oscillation_metric(samples, sol.u, kSection);
      row.h1_error = res.errors.h1_error;
      row.cg_iterations = res.stats.iterations;
      rows.push_back(row);
    }
  }
  return rows;
}

const std::vector<double>& sweep_eps() {
  static const std::vector<double> eps{0.5, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8};
  return eps;
}

std::vector<SweepRow> run_stability_sweep(const ExperimentConfig& config) {
  config.validate();
  // nodal sign enumeration is exponential in the boundary node count
  const int probe_k = 5 * config.k <= 16 ? config.k : 1;
  std::vector<double> eps{0.0};
  eps.insert(eps.end(), sweep_eps().begin(), sweep_eps().end());
  std::vector<SweepRow> rows;
  for (double e : eps) {
    const auto geom = split_square_geometry(e);
    const LocalSpace space(geom, config.k);
    const double ratio = h12_linf_ratio(geom, probe_k);
    const double log_factor = std::log(1.0 + geom.diameter / geom.h_min);
    for (BoundaryStab b : {BoundaryStab::identity, BoundaryStab::tangential, BoundaryStab::l2edge}) {
      StabChoice choice = config.stab;
      choice.boundary = b;
      SweepRow row;
      row.eps = e;
      row.stab = to_string(b);
      row.k = config.k;
      row.c2 = c2_probe(space, choice).c2;
      row.h12_ratio = ratio;
      row.log_factor = log_factor;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string build_id() { return VEMLAB_BUILD_ID; }

namespace {

void header(std::ostream& os, const ExperimentConfig& config, const char* columns) {
  os << "# vemlab " << config.command << "\n# build: " << build_id() << "\n# config: " << config.describe() << "\n"
     << columns << "\n";
}

}  // namespace

void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<ConvergenceRow>& rows) {
  header(os, config, "family,level,h,dofs,h1_error,l2_error,rate");
  for (const auto& r : rows) {
    os << r.family << ',' << r.level << ',' << num(r.h) << ',' << r.dofs << ',' << num(r.h1_error) << ','
       << num(r.l2_error) << ',';
    if (r.rate) os << (std::isinf(*r.rate) ? std::string("inf") : num(*r.rate));
    os << '\n';
  }
}

void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<SmallEdgeRow>& rows) {
  header(os, config, "stab,tau,k,oscillation_metric,h1_error,cg_iterations");
  for (const auto& r : rows)
    os << r.stab << ',' << short_num(r.tau) << ',' << r.k << ',' << num(r.oscillation) << ',' << num(r.h1_error)
       << ',' << r.cg_iterations << '\n';
}

void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  header(os, config, "eps,stab,k,c2_hat,h12_ratio,log_factor");
  for (const auto& r : rows)
    os << short_num(r.eps) << ',' << r.stab << ',' << r.k << ',' << num(r.c2) << ',' << num(r.h12_ratio) << ','
       << num(r.log_factor) << '\n';
}

}  // namespace vemlab
