#include "vemlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "vemlab/quadrature.hpp"
#include "vemlab/system.hpp"

namespace vemlab {

namespace {

std::vector<int> local_to_global(const PolyMesh& mesh, const GlobalDofMap& map, int c) { return map.cell_dofs(mesh, c); }

Eigen::VectorXd gather(const Eigen::VectorXd& uh, const std::vector<int>& dofs) {
  Eigen::VectorXd v(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) v[i] = uh[dofs[i]];
  return v;
}

void check_size(const GlobalDofMap& map, const Eigen::VectorXd& uh) {
  if (uh.size() != map.size()) throw std::invalid_argument("dof vector does not match the mesh and order");
}

}  // namespace

double h1_error(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const VectorField& grad_u) {
  const GlobalDofMap map(mesh, k);
  check_size(map, uh);
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const LocalSpace space(element_geometry(mesh, c), k);
    const auto pg = pi0_gradient(space);
    const Eigen::VectorXd d = gather(uh, local_to_global(mesh, map, c));
    const Eigen::VectorXd cx = pg.dx * d, cy = pg.dy * d;
    const int n = static_cast<int>(cx.size());
    const auto rule = polygon_rule(space.geometry(), 2 * k + 6);
    for (int q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      const Eigen::VectorXd m = space.basis().values(x).head(n);
      const Point g = grad_u(x);
      const double ex = g.x() - cx.dot(m), ey = g.y() - cy.dot(m);
      sum += rule.weights[q] * (ex * ex + ey * ey);
    }
  }
  return std::sqrt(sum);
}

double l2_error(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const ScalarField& u, ROperator r) {
  const GlobalDofMap map(mesh, k);
  check_size(map, uh);
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const LocalSpace space(element_geometry(mesh, c), k);
    const Eigen::VectorXd coeff = projector_pi_nabla(space, r) * gather(uh, local_to_global(mesh, map, c));
    const auto rule = polygon_rule(space.geometry(), 2 * k + 6);
    for (int q = 0; q < rule.size(); ++q) {
      const double e = u(rule.points[q]) - eval_poly(space.basis(), coeff, rule.points[q]);
      sum += rule.weights[q] * e * e;
    }
  }
  return std::sqrt(sum);
}

ErrorReport error_report(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const ScalarField& u,
                         const VectorField& grad_u, ROperator r) {
  ErrorReport rep;
  rep.h1_error = h1_error(mesh, k, uh, grad_u);
  rep.l2_error = l2_error(mesh, k, uh, u, r);
  rep.mean_diameter = quality_report(mesh).mean_diameter;
  rep.num_dofs = static_cast<int>(uh.size());
  return rep;
}

Eigen::VectorXd interpolate_global(const PolyMesh& mesh, int k, const ScalarField& u) {
  const GlobalDofMap map(mesh, k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(map.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const LocalSpace space(element_geometry(mesh, c), k);
    const Eigen::VectorXd d = interpolate(space, u);
    const auto dofs = local_to_global(mesh, map, c);
    for (std::size_t i = 0; i < dofs.size(); ++i) out[dofs[i]] = d[i];
  }
  return out;
}

std::vector<double> convergence_rate(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw std::invalid_argument("convergence_rate: need two or more (error, h) pairs of equal length");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(hs[i] > hs[i + 1]) || !(hs[i + 1] > 0.0))
      throw std::invalid_argument("convergence_rate: mesh sizes must be positive and decreasing");
    if (errors[i] < 0.0 || errors[i + 1] < 0.0) throw std::invalid_argument("convergence_rate: negative error");
    if (errors[i] == 0.0 || errors[i + 1] == 0.0) {
      rates.push_back(kInfiniteRate);
      continue;
    }
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return rates;
}

// ---------------------------------------------------------------------------

C2Probe c2_probe(const LocalSpace& space, const StabChoice& choice, double k_e) {
  choice.validate(space.order());
  const Eigen::MatrixXd& d = space.polynomial_dofs();
  const int nk = static_cast<int>(d.cols());
  const Eigen::RowVectorXd r = r_functional(space, choice.r_operator);
  // dofs of (I - R) m_a for the non-constant monomials
  Eigen::MatrixXd w = d.rightCols(nk - 1);
  w -= d.col(0) * (r * w);
  const auto st = stab_matrix(space, choice, k_e);
  const Eigen::MatrixXd s = w.transpose() * (st.boundary + st.internal) * w;
  const Eigen::MatrixXd g = k_e * space.stiffness().bottomRightCorner(nk - 1, nk - 1);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()), g);
  if (es.info() != Eigen::Success) throw std::runtime_error("c2_probe: generalized eigensolver failed");
  const int last = nk - 2;
  const double lambda = es.eigenvalues()[last];
  const Eigen::VectorXd x = es.eigenvectors().col(last);
  const double scale = (s.norm() + std::abs(lambda) * g.norm()) * x.norm();
  C2Probe out;
  out.c2 = std::max(lambda, 0.0);
  out.residual = scale > 0.0 ? (s * x - lambda * g * x).norm() / scale : 0.0;
  if (!(out.residual <= 1e-8)) throw std::runtime_error("c2_probe: eigenpair residual too large");
  return out;
}

// ---------------------------------------------------------------------------

BoundaryTraces trace_from_dofs(const LocalSpace& space, const Eigen::VectorXd& dofs) {
  const auto& lay = space.layout();
  if (dofs.size() != lay.size()) throw std::invalid_argument("trace_from_dofs: wrong dof count");
  BoundaryTraces t;
  t.vertices = space.geometry().vertices;
  t.order = space.order();
  for (int e = 0; e < lay.num_vertices(); ++e) {
    const auto d = lay.edge_dofs(e);
    Eigen::MatrixXd v(1, d.size());
    for (std::size_t q = 0; q < d.size(); ++q) v(0, q) = dofs[d[q]];
    t.edge_values.push_back(std::move(v));
  }
  return t;
}

BoundaryTraces nodal_boundary_basis(const LocalSpace& space) {
  const auto& lay = space.layout();
  BoundaryTraces t;
  t.vertices = space.geometry().vertices;
  t.order = space.order();
  const int nb = lay.num_boundary();
  for (int e = 0; e < lay.num_vertices(); ++e) {
    const auto d = lay.edge_dofs(e);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(nb, d.size());
    for (std::size_t q = 0; q < d.size(); ++q) v(d[q], q) = 1.0;
    t.edge_values.push_back(std::move(v));
  }
  return t;
}

namespace {

constexpr int kPairPoints = 16;

// A piece [t0, t1] of edge e of the traced boundary.
struct Segment {
  int edge;
  double t0, t1;
  Point a, b;
  double length() const { return (b - a).norm(); }
};

class H12Integrator {
public:
  explicit H12Integrator(const BoundaryTraces& tr) : tr_(tr), nf_(tr.num_functions()), gll_(gauss_lobatto(tr.order + 1)) {
    const int n = static_cast<int>(tr.vertices.size());
    if (n < 3 || static_cast<int>(tr.edge_values.size()) != n)
      throw std::invalid_argument("h12: one value block per boundary edge expected");
    for (const auto& v : tr.edge_values)
      if (v.rows() != nf_ || v.cols() != tr.order + 1) throw std::invalid_argument("h12: inconsistent trace blocks");
    scale_ = 0.0;
    for (int e = 0; e < n; ++e) scale_ = std::max(scale_, (tr.vertices[(e + 1) % n] - tr.vertices[e]).norm());
    // continuity at vertices
    for (int e = 0; e < n; ++e) {
      const auto& cur = tr.edge_values[e];
      const auto& nxt = tr.edge_values[(e + 1) % n];
      const double jump = (cur.col(tr.order) - nxt.col(0)).cwiseAbs().maxCoeff();
      const double mag = std::max(1.0, cur.cwiseAbs().maxCoeff());
      if (jump > 1e-12 * mag) throw std::invalid_argument("h12: trace is discontinuous at a vertex");
    }
  }

  Eigen::MatrixXd gram() {
    const int n = static_cast<int>(tr_.vertices.size());
    g_ = Eigen::MatrixXd::Zero(nf_, nf_);
    for (int e = 0; e < n; ++e) same_edge(e);
    Eigen::MatrixXd diag = g_;
    g_.setZero();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pair(whole(a), whole(b), 0);
    Eigen::MatrixXd out = diag + g_ + g_.transpose();
    return 0.5 * (out + out.transpose());
  }

private:
  Segment whole(int e) const {
    const int n = static_cast<int>(tr_.vertices.size());
    return {e, 0.0, 1.0, tr_.vertices[e], tr_.vertices[(e + 1) % n]};
  }

  Point at(int e, double t) const {
    const int n = static_cast<int>(tr_.vertices.size());
    return tr_.vertices[e] + t * (tr_.vertices[(e + 1) % n] - tr_.vertices[e]);
  }

  // All function values on edge e at relative position t.
  Eigen::VectorXd values(int e, double t) const {
    const double s = 2.0 * t - 1.0;
    const int m = tr_.order + 1;
    Eigen::VectorXd l(m);
    for (int a = 0; a < m; ++a) {
      double p = 1.0;
      for (int b = 0; b < m; ++b)
        if (b != a) p *= (s - gll_.nodes[b]) / (gll_.nodes[a] - gll_.nodes[b]);
      l[a] = p;
    }
    return tr_.edge_values[e] * l;
  }

  // Edge against itself: the difference quotient (v(t1)-v(t2))/(t1-t2) is a
  // polynomial, so the integrand is smooth after cancelling the denominator.
  void same_edge(int e) {
    const int m = tr_.order + 1;
    Eigen::MatrixXd vand(m, m);
    for (int q = 0; q < m; ++q) {
      const double t = 0.5 * (gll_.nodes[q] + 1.0);
      double p = 1.0;
      for (int j = 0; j < m; ++j, p *= t) vand(q, j) = p;
    }
    // monomial coefficients in t, one row per function
    const Eigen::MatrixXd c = vand.fullPivLu().solve(tr_.edge_values[e].transpose()).transpose();
    const auto& g = gauss_legendre(kPairPoints);
    for (int i = 0; i < g.size(); ++i) {
      const double t1 = 0.5 * (g.nodes[i] + 1.0);
      for (int j = 0; j < g.size(); ++j) {
        const double t2 = 0.5 * (g.nodes[j] + 1.0);
        Eigen::VectorXd dd = Eigen::VectorXd::Zero(nf_);
        for (int p = 1; p < m; ++p) {
          double s = 0.0;
          for (int a = 0; a < p; ++a) s += std::pow(t1, a) * std::pow(t2, p - 1 - a);
          dd += s * c.col(p);
        }
        g_.noalias() += (0.25 * g.weights[i] * g.weights[j]) * dd * dd.transpose();
      }
    }
  }

  static double seg_point_distance(const Point& p, const Point& a, const Point& b) {
    const Point d = b - a;
    const double l2 = d.squaredNorm();
    double t = l2 > 0.0 ? (p - a).dot(d) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * d)).norm();
  }

  static double distance(const Segment& s, const Segment& r) {
    return std::min({seg_point_distance(s.a, r.a, r.b), seg_point_distance(s.b, r.a, r.b),
                     seg_point_distance(r.a, s.a, s.b), seg_point_distance(r.b, s.a, s.b)});
  }

  static std::pair<Segment, Segment> bisect(const Segment& s, const H12Integrator& self) {
    const double tm = 0.5 * (s.t0 + s.t1);
    const Point m = self.at(s.edge, tm);
    return {{s.edge, s.t0, tm, s.a, m}, {s.edge, tm, s.t1, m, s.b}};
  }

  // Which endpoints of s and r coincide; returns false if none.
  bool touching(const Segment& s, const Segment& r, bool& s_start, bool& r_start) const {
    const double tol = 1e-13 * scale_;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Point& ps = i == 0 ? s.a : s.b;
        const Point& pr = j == 0 ? r.a : r.b;
        if ((ps - pr).norm() <= tol) {
          s_start = i == 0;
          r_start = j == 0;
          return true;
        }
      }
    return false;
  }

  void pair(const Segment& s, const Segment& r, int depth) {
    if (depth > 400) throw std::runtime_error("h12: subdivision did not terminate");
    const double ls = s.length(), lr = r.length();
    bool s_start = false, r_start = false;
    if (touching(s, r, s_start, r_start)) {
      if (std::max(ls, lr) <= 2.0 * std::min(ls, lr)) {
        duffy(s, s_start, r, r_start);
        return;
      }
    } else if (distance(s, r) >= std::max(ls, lr)) {
      tensor(s, r);
      return;
    }
    if (ls >= lr) {
      const auto [s1, s2] = bisect(s, *this);
      pair(s1, r, depth + 1);
      pair(s2, r, depth + 1);
    } else {
      const auto [r1, r2] = bisect(r, *this);
      pair(s, r1, depth + 1);
      pair(s, r2, depth + 1);
    }
  }

  void tensor(const Segment& s, const Segment& r) {
    const auto& g = gauss_legendre(kPairPoints);
    const int m = g.size();
    std::vector<Eigen::VectorXd> vs(m), vr(m);
    std::vector<Point> ps(m), pr(m);
    for (int i = 0; i < m; ++i) {
      const double u = 0.5 * (g.nodes[i] + 1.0);
      const double ts = s.t0 + u * (s.t1 - s.t0), trr = r.t0 + u * (r.t1 - r.t0);
      vs[i] = values(s.edge, ts);
      vr[i] = values(r.edge, trr);
      ps[i] = s.a + u * (s.b - s.a);
      pr[i] = r.a + u * (r.b - r.a);
    }
    const double jac = 0.25 * s.length() * r.length();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd d = vs[i] - vr[j];
        const double w = jac * g.weights[i] * g.weights[j] / (ps[i] - pr[j]).squaredNorm();
        g_.noalias() += w * d * d.transpose();
      }
  }

  // Segments meeting at a corner: split the square of distances from the corner
  // along its diagonal and collapse each triangle onto the corner.
  void duffy(const Segment& s, bool s_start, const Segment& r, bool r_start) {
    const double ls = s.length(), lr = r.length();
    const Point ds = (s_start ? (s.b - s.a) : (s.a - s.b)) / ls;
    const Point dr = (r_start ? (r.b - r.a) : (r.a - r.b)) / lr;
    auto param = [](const Segment& x, bool start, double xi) {
      return start ? x.t0 + xi * (x.t1 - x.t0) : x.t1 - xi * (x.t1 - x.t0);
    };
    const auto& g = gauss_legendre(kPairPoints);
    for (int tri = 0; tri < 2; ++tri)
      for (int i = 0; i < g.size(); ++i) {
        const double xi = 0.5 * (g.nodes[i] + 1.0);
        for (int j = 0; j < g.size(); ++j) {
          const double eta = 0.5 * (g.nodes[j] + 1.0);
          const double xs = tri == 0 ? xi : xi * eta;
          const double xr = tri == 0 ? xi * eta : xi;
          const Point diff = xs * ls * ds - xr * lr * dr;
          const Eigen::VectorXd d = values(s.edge, param(s, s_start, xs)) - values(r.edge, param(r, r_start, xr));
          const double w = 0.25 * g.weights[i] * g.weights[j] * ls * lr * xi / diff.squaredNorm();
          g_.noalias() += w * d * d.transpose();
        }
      }
  }

  const BoundaryTraces& tr_;
  int nf_;
  const QuadRule1D& gll_;
  double scale_ = 1.0;
  Eigen::MatrixXd g_;
};

}  // namespace

Eigen::MatrixXd h12_gram(const BoundaryTraces& traces) {
  if (traces.order < 1) throw std::invalid_argument("h12: trace order must be >= 1");
  H12Integrator integ(traces);
  return integ.gram();
}

double h12_seminorm(const BoundaryTraces& trace) {
  if (trace.num_functions() != 1) throw std::invalid_argument("h12_seminorm: expects a single trace");
  return h12_gram(trace)(0, 0);
}

double h12_linf_ratio(const ElementGeometry& geom, int k) {
  const LocalSpace space(geom, k);
  const auto basis = nodal_boundary_basis(space);
  const Eigen::MatrixXd g = h12_gram(basis);
  const int nb = static_cast<int>(g.rows());
  if (nb > 22) throw std::invalid_argument("h12_linf_ratio: too many boundary nodes to enumerate");
  const auto& lay = space.layout();

  // sampling points for the sup norm of degree >= 2 traces
  constexpr int kSamples = 64;
  std::vector<Eigen::MatrixXd> samples;
  if (k >= 2) {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(lay.size());
    for (int e = 0; e < lay.num_vertices(); ++e) {
      Eigen::MatrixXd m(kSamples + 1, nb);
      for (int i = 0; i <= kSamples; ++i) {
        const double t = static_cast<double>(i) / kSamples;
        for (int b = 0; b < nb; ++b) {
          zero[b] = 1.0;
          m(i, b) = space.edge_trace(zero, e, t);
          zero[b] = 0.0;
        }
      }
      samples.push_back(std::move(m));
    }
  }

  double best = 0.0;
  Eigen::VectorXd s(nb);
  const long combos = 1L << (nb - 1);
  for (long mask = 0; mask < combos; ++mask) {
    s[0] = 1.0;
    for (int b = 1; b < nb; ++b) s[b] = (mask >> (b - 1)) & 1 ? -1.0 : 1.0;
    const double num = s.dot(g * s);
    double sup = 1.0;
    for (const auto& m : samples) sup = std::max(sup, (m * s).cwiseAbs().maxCoeff());
    best = std::max(best, num / (sup * sup));
  }
  return best;
}

ElementGeometry split_square_geometry(double eps) {
  std::vector<Point> v;
  v.emplace_back(0.0, 0.0);
  if (eps > 0.0) v.emplace_back(eps, 0.0);
  v.emplace_back(1.0, 0.0);
  v.emplace_back(1.0, 1.0);
  v.emplace_back(0.0, 1.0);
  return polygon_geometry(v);
}

std::vector<LogBoundRow> log_bound_check(const std::vector<double>& eps_sweep, int k) {
  std::vector<LogBoundRow> rows;
  auto row = [k](double eps) {
    const auto geom = split_square_geometry(eps);
    LogBoundRow r;
    r.eps = eps;
    r.ratio = h12_linf_ratio(geom, k);
    r.log_factor = std::log(1.0 + geom.diameter / geom.h_min);
    r.normalized = r.ratio / r.log_factor;
    return r;
  };
  rows.push_back(row(0.0));
  for (double eps : eps_sweep) {
    if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("log_bound_check: eps must lie in (0, 1/2]");
    rows.push_back(row(eps));
  }
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

struct CellCache {
  std::unique_ptr<LocalSpace> space;
  Eigen::VectorXd dofs;
  Eigen::VectorXd coeff;  // Pi^nabla u_h
};

bool inside_polygon(const std::vector<Point>& poly, const Point& p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

}  // namespace

std::vector<SectionSample> section_sample(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, double x0, int n,
                                          ROperator r) {
  if (n < 1) throw std::invalid_argument("section_sample: need at least one sample");
  const GlobalDofMap map(mesh, k);
  check_size(map, uh);
  const double tol = 1e-12;

  // cells whose x-range contains x0
  std::vector<int> candidates;
  std::vector<std::pair<double, double>> yrange(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int v : mesh.cell(c)) {
      const Point& p = mesh.vertex(v);
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    yrange[c] = {ymin, ymax};
    if (x0 >= xmin - tol && x0 <= xmax + tol) candidates.push_back(c);
  }

  std::vector<CellCache> cache(mesh.num_cells());
  auto prepared = [&](int c) -> CellCache& {
    auto& cc = cache[c];
    if (!cc.space) {
      cc.space = std::make_unique<LocalSpace>(element_geometry(mesh, c), k);
      cc.dofs = gather(uh, map.cell_dofs(mesh, c));
      cc.coeff = projector_pi_nabla(*cc.space, r) * cc.dofs;
    }
    return cc;
  };

  std::vector<SectionSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double y = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    const Point p(x0, y);
    SectionSample smp;
    smp.y = y;
    bool found = false;
    // edge traces first, so interface points use the computable trace
    for (int c : candidates) {
      if (y < yrange[c].first - tol || y > yrange[c].second + tol) continue;
      const auto& cyc = mesh.cell(c);
      const int nv = static_cast<int>(cyc.size());
      for (int e = 0; e < nv && !found; ++e) {
        const Point& a = mesh.vertex(cyc[e]);
        const Point& b = mesh.vertex(cyc[(e + 1) % nv]);
        const Point d = b - a;
        const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
        if ((p - (a + t * d)).norm() <= tol * std::max(1.0, d.norm())) {
          auto& cc = prepared(c);
          smp.value = cc.space->edge_trace(cc.dofs, e, t);
          smp.on_edge = true;
          found = true;
        }
      }
      if (found) break;
    }
    if (!found) {
      for (int c : candidates) {
        if (y < yrange[c].first - tol || y > yrange[c].second + tol) continue;
        if (inside_polygon(mesh.cell_polygon(c), p)) {
          auto& cc = prepared(c);
          smp.value = eval_poly(cc.space->basis(), cc.coeff, p);
          found = true;
          break;
        }
      }
    }
    if (!found) throw std::invalid_argument("section_sample: sample point lies outside the mesh");
    out.push_back(smp);
  }
  return out;
}

double oscillation_metric(const std::vector<SectionSample>& samples, const ScalarField& u, double x0) {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::abs(s.value - u(Point(x0, s.y))));
  return m;
}

}  // namespace vemlab
