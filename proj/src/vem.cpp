#include "vemlab/vem.hpp"

#include <cmath>
#include <stdexcept>

#include "vemlab/quadrature.hpp"

namespace vemlab {

BoundaryStab parse_boundary_stab(const std::string& s) {
  if (s == "identity") return BoundaryStab::identity;
  if (s == "tangential") return BoundaryStab::tangential;
  if (s == "l2edge") return BoundaryStab::l2edge;
  throw std::invalid_argument("unknown boundary stabilization '" + s + "'");
}

InternalStab parse_internal_stab(const std::string& s) {
  if (s == "moments") return InternalStab::moments;
  if (s == "none") return InternalStab::none;
  throw std::invalid_argument("unknown internal stabilization '" + s + "'");
}

ROperator parse_r_operator(const std::string& s) {
  if (s == "cell" || s == "cell_mean") return ROperator::cell_mean;
  if (s == "boundary" || s == "boundary_mean") return ROperator::boundary_mean;
  if (s == "vertex" || s == "vertex_mean") return ROperator::vertex_mean;
  throw std::invalid_argument("unknown R operator '" + s + "'");
}

std::string to_string(BoundaryStab s) {
  switch (s) {
    case BoundaryStab::identity: return "identity";
    case BoundaryStab::tangential: return "tangential";
    case BoundaryStab::l2edge: return "l2edge";
  }
  return "?";
}

std::string to_string(InternalStab s) { return s == InternalStab::moments ? "moments" : "none"; }

std::string to_string(ROperator r) {
  switch (r) {
    case ROperator::cell_mean: return "cell";
    case ROperator::boundary_mean: return "boundary";
    case ROperator::vertex_mean: return "vertex";
  }
  return "?";
}

void StabChoice::validate(int k) const {
  if (!(tau > 0.0)) throw std::invalid_argument("stabilization scale tau must be positive");
  if (k < 1) throw std::invalid_argument("polynomial order k must be >= 1");
  if (r_operator == ROperator::cell_mean && k < 2)
    throw std::invalid_argument("the cell-mean R operator needs k >= 2");
}

// ---------------------------------------------------------------------------

MonomialBasis::MonomialBasis(int k, Point center, double h) : k_(k), center_(std::move(center)), h_(h) {
  exps_.reserve(dim(k));
  for (int d = 0; d <= k; ++d)
    for (int b = 0; b <= d; ++b) exps_.emplace_back(d - b, b);
}

Eigen::VectorXd MonomialBasis::values(const Point& x) const {
  const Point s = scaled(x);
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) {
    const auto [a, b] = exps_[i];
    v[i] = std::pow(s.x(), a) * std::pow(s.y(), b);
  }
  return v;
}

Eigen::MatrixX2d MonomialBasis::gradients(const Point& x) const {
  const Point s = scaled(x);
  Eigen::MatrixX2d g(size(), 2);
  for (int i = 0; i < size(); ++i) {
    const auto [a, b] = exps_[i];
    g(i, 0) = a > 0 ? a * std::pow(s.x(), a - 1) * std::pow(s.y(), b) / h_ : 0.0;
    g(i, 1) = b > 0 ? b * std::pow(s.x(), a) * std::pow(s.y(), b - 1) / h_ : 0.0;
  }
  return g;
}

double eval_poly(const MonomialBasis& basis, const Eigen::VectorXd& coeffs, const Point& x) {
  return basis.values(x).head(coeffs.size()).dot(coeffs);
}

// ---------------------------------------------------------------------------

DofLayout::DofLayout(const ElementGeometry& geom, int k) : k_(k), n_(geom.num_edges()) {
  if (k < 1) throw std::invalid_argument("DofLayout: k must be >= 1");
  points_.resize(num_boundary());
  const auto& gll = gauss_lobatto(k + 1);
  for (int i = 0; i < n_; ++i) points_[i] = geom.vertices[i];
  for (int e = 0; e < n_; ++e) {
    const Point& a = geom.vertices[e];
    const Point& b = geom.vertices[(e + 1) % n_];
    for (int j = 0; j < k - 1; ++j) {
      const double t = 0.5 * (gll.nodes[j + 1] + 1.0);
      points_[edge_dof(e, j)] = a + t * (b - a);
    }
  }
}

std::vector<int> DofLayout::edge_dofs(int e) const {
  std::vector<int> d;
  d.reserve(k_ + 1);
  d.push_back(vertex_dof(e));
  for (int j = 0; j < k_ - 1; ++j) d.push_back(edge_dof(e, j));
  d.push_back(vertex_dof((e + 1) % n_));
  return d;
}

DofLayout dof_layout(const ElementGeometry& geom, int k) { return DofLayout(geom, k); }

namespace {

// Lagrange basis on `nodes` and its derivative, evaluated at s.
void lagrange(const std::vector<double>& nodes, double s, Eigen::VectorXd& val, Eigen::VectorXd& der) {
  const int n = static_cast<int>(nodes.size());
  val.resize(n);
  der.resize(n);
  for (int a = 0; a < n; ++a) {
    double l = 1.0, dl = 0.0;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const double inv = 1.0 / (nodes[a] - nodes[b]);
      dl = dl * (s - nodes[b]) * inv + l * inv;
      l *= (s - nodes[b]) * inv;
    }
    val[a] = l;
    der[a] = dl;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

LocalSpace::LocalSpace(ElementGeometry geom, int k)
    : geom_(std::move(geom)), k_(k), basis_(k, geom_.centroid, geom_.diameter), layout_(geom_, k) {
  // int_E xi^p eta^q = (1/(p+1)) oint xi^{p+1} eta^q n_xi, in scaled coordinates
  const int maxdeg = 2 * k + 2;
  moments_ = Eigen::MatrixXd::Zero(maxdeg + 1, maxdeg + 1);
  const auto& g = gauss_legendre(maxdeg / 2 + 2);
  const int n = geom_.num_edges();
  const double h = geom_.diameter;
  for (int e = 0; e < n; ++e) {
    const Point a = basis_.scaled(geom_.vertices[e]);
    const Point b = basis_.scaled(geom_.vertices[(e + 1) % n]);
    const double deta = b.y() - a.y();
    if (deta == 0.0) continue;
    for (int q = 0; q < g.size(); ++q) {
      const double t = 0.5 * (g.nodes[q] + 1.0);
      const double w = 0.5 * g.weights[q] * deta;
      const Point x = a + t * (b - a);
      double xp = x.x();  // xi^{p+1}
      for (int p = 0; p <= maxdeg; ++p) {
        double yq = 1.0;
        for (int qq = 0; qq + p <= maxdeg; ++qq) {
          moments_(p, qq) += w * xp * yq / (p + 1);
          yq *= x.y();
        }
        xp *= x.x();
      }
    }
  }
  moments_ *= h * h;

  // boundary weights from the (k+1)-point Gauss-Lobatto rule on each edge
  const auto& gll = gauss_lobatto(k + 1);
  bweights_ = Eigen::VectorXd::Zero(layout_.num_boundary());
  for (int e = 0; e < n; ++e) {
    const auto d = layout_.edge_dofs(e);
    for (int q = 0; q <= k; ++q) bweights_[d[q]] += 0.5 * geom_.edge_lengths[e] * gll.weights[q];
  }

  // dofs of the monomials
  const int nk = basis_.size();
  poly_dofs_.resize(layout_.size(), nk);
  for (int i = 0; i < layout_.num_boundary(); ++i)
    poly_dofs_.row(i) = basis_.values(layout_.boundary_points()[i]).transpose();
  for (int beta = 0; beta < layout_.num_internal(); ++beta) {
    const auto [a2, b2] = basis_.exponent(beta);
    for (int alpha = 0; alpha < nk; ++alpha) {
      const auto [a1, b1] = basis_.exponent(alpha);
      poly_dofs_(layout_.internal_dof(beta), alpha) = moments_(a1 + a2, b1 + b2) / geom_.area;
    }
  }
}

double LocalSpace::monomial_integral(int p, int q) const {
  if (p < 0 || q < 0 || p + q >= moments_.rows()) throw std::out_of_range("monomial_integral: degree too high");
  return moments_(p, q);
}

Eigen::MatrixXd LocalSpace::mass(int degree) const {
  const int n = MonomialBasis::dim(degree);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto [a1, b1] = basis_.exponent(i);
      const auto [a2, b2] = basis_.exponent(j);
      m(i, j) = moments_(a1 + a2, b1 + b2);
    }
  return m;
}

Eigen::MatrixXd LocalSpace::stiffness() const {
  const int n = basis_.size();
  const double h2 = geom_.diameter * geom_.diameter;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const auto [a1, b1] = basis_.exponent(i);
      const auto [a2, b2] = basis_.exponent(j);
      double v = 0.0;
      if (a1 > 0 && a2 > 0) v += a1 * a2 * moments_(a1 + a2 - 2, b1 + b2);
      if (b1 > 0 && b2 > 0) v += b1 * b2 * moments_(a1 + a2, b1 + b2 - 2);
      s(i, j) = v / h2;
    }
  return s;
}

double LocalSpace::edge_trace(const Eigen::VectorXd& dofs, int e, double t) const {
  const auto& gll = gauss_lobatto(k_ + 1);
  Eigen::VectorXd val, der;
  lagrange(gll.nodes, 2.0 * t - 1.0, val, der);
  const auto d = layout_.edge_dofs(e);
  double s = 0.0;
  for (int q = 0; q <= k_; ++q) s += val[q] * dofs[d[q]];
  return s;
}

// ---------------------------------------------------------------------------

Eigen::RowVectorXd r_functional(const LocalSpace& space, ROperator choice) {
  const auto& lay = space.layout();
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(lay.size());
  switch (choice) {
    case ROperator::vertex_mean:
      for (int i = 0; i < lay.num_vertices(); ++i) r[lay.vertex_dof(i)] = 1.0 / lay.num_vertices();
      break;
    case ROperator::boundary_mean:
      r.head(lay.num_boundary()) = space.boundary_weights().transpose() / space.geometry().perimeter;
      break;
    case ROperator::cell_mean:
      if (space.order() < 2) throw std::invalid_argument("the cell-mean R operator needs k >= 2");
      r[lay.internal_dof(0)] = 1.0;
      break;
  }
  return r;
}

double apply_R(const LocalSpace& space, ROperator choice, const Eigen::VectorXd& dofs) {
  return r_functional(space, choice).dot(dofs);
}

Eigen::MatrixXd projector_pi_nabla(const LocalSpace& space, ROperator choice) {
  // Assembled in extended precision with G := B D, so that Pi D = I holds to
  // rounding even on elongated cells where G has condition number ~1e8.
  using Real = long double;
  using MatL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const auto& lay = space.layout();
  const auto& basis = space.basis();
  const auto& geom = space.geometry();
  const int nk = basis.size();
  const int nd = lay.size();
  const int k = space.order();
  const Real h = geom.diameter;
  const Real h2 = h * h;
  const Real area = geom.area;

  auto scaled = [&](const Point& x, Real& xi, Real& eta) {
    xi = (Real(x.x()) - Real(basis.center().x())) / h;
    eta = (Real(x.y()) - Real(basis.center().y())) / h;
  };
  auto ipow = [](Real v, int n) {
    Real r = 1;
    for (int i = 0; i < n; ++i) r *= v;
    return r;
  };

  const MatL D = space.polynomial_dofs().cast<Real>();

  const Eigen::Matrix<Real, 1, Eigen::Dynamic> r = r_functional(space, choice).cast<Real>();
  MatL B = MatL::Zero(nk, nd);
  B.row(0) = r;
  // -int_E phi_j Lap(m_a): Lap(m_a) lies in P_{k-2}, so the internal moments give it
  for (int alpha = 1; alpha < nk; ++alpha) {
    const auto [a, b] = basis.exponent(alpha);
    if (a >= 2) B(alpha, lay.internal_dof(MonomialBasis::index(a - 2, b))) -= area * a * (a - 1) / h2;
    if (b >= 2) B(alpha, lay.internal_dof(MonomialBasis::index(a, b - 2))) -= area * b * (b - 1) / h2;
  }
  // + oint phi_j grad(m_a).n, exact with the Gauss-Lobatto nodes at the dofs
  const auto& gll = gauss_lobatto(k + 1);
  for (int e = 0; e < geom.num_edges(); ++e) {
    const auto d = lay.edge_dofs(e);
    const Real nx = geom.normals[e].x(), ny = geom.normals[e].y();
    for (int q = 0; q <= k; ++q) {
      const Real w = Real(0.5) * Real(geom.edge_lengths[e]) * Real(gll.weights[q]);
      Real xi, eta;
      scaled(lay.boundary_points()[d[q]], xi, eta);
      for (int alpha = 1; alpha < nk; ++alpha) {
        const auto [a, b] = basis.exponent(alpha);
        const Real gx = a > 0 ? a * ipow(xi, a - 1) * ipow(eta, b) / h : 0;
        const Real gy = b > 0 ? b * ipow(xi, a) * ipow(eta, b - 1) / h : 0;
        B(alpha, d[q]) += w * (gx * nx + gy * ny);
      }
    }
  }

  const MatL G = B * D;
  Eigen::FullPivLU<MatL> lu(G);
  if (!lu.isInvertible()) throw std::runtime_error("projector_pi_nabla: singular local system (degenerate element)");
  return lu.solve(B).template cast<double>();
}

Pi0Grad pi0_gradient(const LocalSpace& space) {
  const auto& lay = space.layout();
  const auto& basis = space.basis();
  const auto& geom = space.geometry();
  const int k = space.order();
  const int n1 = MonomialBasis::dim(k - 1);
  const int nd = lay.size();
  const double h = geom.diameter;

  Eigen::MatrixXd bx = Eigen::MatrixXd::Zero(n1, nd);
  Eigen::MatrixXd by = Eigen::MatrixXd::Zero(n1, nd);
  for (int beta = 0; beta < n1; ++beta) {
    const auto [a, b] = basis.exponent(beta);
    if (a >= 1) bx(beta, lay.internal_dof(MonomialBasis::index(a - 1, b))) -= geom.area * a / h;
    if (b >= 1) by(beta, lay.internal_dof(MonomialBasis::index(a, b - 1))) -= geom.area * b / h;
  }
  const auto& gll = gauss_lobatto(k + 1);
  for (int e = 0; e < geom.num_edges(); ++e) {
    const auto d = lay.edge_dofs(e);
    const Point& nrm = geom.normals[e];
    for (int q = 0; q <= k; ++q) {
      const double w = 0.5 * geom.edge_lengths[e] * gll.weights[q];
      const Eigen::VectorXd m = basis.values(lay.boundary_points()[d[q]]).head(n1);
      bx.col(d[q]) += w * nrm.x() * m;
      by.col(d[q]) += w * nrm.y() * m;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(space.mass(k - 1));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("pi0_gradient: singular mass matrix");
  return {ldlt.solve(bx), ldlt.solve(by)};
}

StabMatrices stab_matrix(const LocalSpace& space, const StabChoice& choice, double k_e) {
  const auto& lay = space.layout();
  const auto& geom = space.geometry();
  const int k = space.order();
  const int nd = lay.size();
  const int nb = lay.num_boundary();
  StabMatrices s{Eigen::MatrixXd::Zero(nd, nd), Eigen::MatrixXd::Zero(nd, nd)};

  const auto& gll = gauss_lobatto(k + 1);
  Eigen::VectorXd val, der;
  switch (choice.boundary) {
    case BoundaryStab::identity:
      s.boundary.topLeftCorner(nb, nb).setIdentity();
      break;
    case BoundaryStab::tangential: {
      const auto& g = gauss_legendre(k);
      for (int e = 0; e < geom.num_edges(); ++e) {
        const auto d = lay.edge_dofs(e);
        const double scale = geom.diameter * 2.0 / geom.edge_lengths[e];
        for (int q = 0; q < g.size(); ++q) {
          lagrange(gll.nodes, g.nodes[q], val, der);
          for (int a = 0; a <= k; ++a)
            for (int b = 0; b <= k; ++b) s.boundary(d[a], d[b]) += scale * g.weights[q] * der[a] * der[b];
        }
      }
      break;
    }
    case BoundaryStab::l2edge: {
      const auto& g = gauss_legendre(k + 1);
      for (int e = 0; e < geom.num_edges(); ++e) {
        const auto d = lay.edge_dofs(e);
        for (int q = 0; q < g.size(); ++q) {
          lagrange(gll.nodes, g.nodes[q], val, der);
          for (int a = 0; a <= k; ++a)
            for (int b = 0; b <= k; ++b) s.boundary(d[a], d[b]) += 0.5 * g.weights[q] * val[a] * val[b];
        }
      }
      break;
    }
  }
  if (choice.internal == InternalStab::moments && lay.num_internal() > 0)
    s.internal.bottomRightCorner(lay.num_internal(), lay.num_internal()).setIdentity();

  const double scale = choice.tau * k_e;
  s.boundary *= scale;
  s.internal *= scale;
  return s;
}

LocalOperators local_stiffness(const LocalSpace& space, const StabChoice& choice, double k_e) {
  choice.validate(space.order());
  LocalOperators op;
  op.k_e = k_e;
  op.tau = choice.tau;
  op.pi_star = projector_pi_nabla(space, choice.r_operator);
  op.pi_dof = space.polynomial_dofs() * op.pi_star;
  auto st = stab_matrix(space, choice, k_e);
  op.s_boundary = std::move(st.boundary);
  op.s_internal = std::move(st.internal);
  op.pi0_grad = pi0_gradient(space);

  const int nd = space.num_dofs();
  const Eigen::MatrixXd comp = Eigen::MatrixXd::Identity(nd, nd) - op.pi_dof;
  const Eigen::MatrixXd a = k_e * op.pi_star.transpose() * space.stiffness() * op.pi_star +
                            comp.transpose() * (op.s_boundary + op.s_internal) * comp;
  op.a_h = 0.5 * (a + a.transpose());
  return op;
}

Eigen::VectorXd local_load(const LocalSpace& space, const ScalarField& f) {
  const auto& lay = space.layout();
  const auto& geom = space.geometry();
  const int k = space.order();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(lay.size());
  const auto rule = polygon_rule(geom, 2 * k);

  if (k == 1) {
    double integral = 0.0;
    for (int q = 0; q < rule.size(); ++q) integral += rule.weights[q] * f(rule.points[q]);
    for (int i = 0; i < lay.num_vertices(); ++i) load[lay.vertex_dof(i)] = integral / lay.num_vertices();
    return load;
  }

  const int ni = lay.num_internal();
  Eigen::VectorXd fm = Eigen::VectorXd::Zero(ni);
  for (int q = 0; q < rule.size(); ++q)
    fm += rule.weights[q] * f(rule.points[q]) * space.basis().values(rule.points[q]).head(ni);
  load.tail(ni) = geom.area * space.mass(k - 2).ldlt().solve(fm);
  return load;
}

Eigen::VectorXd interpolate(const LocalSpace& space, const ScalarField& u) {
  const auto& lay = space.layout();
  const auto& geom = space.geometry();
  Eigen::VectorXd dofs(lay.size());
  for (int i = 0; i < lay.num_boundary(); ++i) dofs[i] = u(lay.boundary_points()[i]);
  const int ni = lay.num_internal();
  if (ni > 0) {
    const auto rule = polygon_rule(geom, 2 * space.order() + 2);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(ni);
    for (int q = 0; q < rule.size(); ++q)
      m += rule.weights[q] * u(rule.points[q]) * space.basis().values(rule.points[q]).head(ni);
    dofs.tail(ni) = m / geom.area;
  }
  return dofs;
}

}  // namespace vemlab
