#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vemlab/mesh.hpp"

namespace vemlab {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Boundary part of the stabilization.
enum class BoundaryStab {
  identity,    // sum of products of boundary dofs
  tangential,  // h_E * int_{dE} d_s v d_s w
  l2edge,      // sum_e h_e^{-1} int_e v w
};

/// Internal part of the stabilization.
enum class InternalStab { moments, none };

/// Rank-one averaging operator fixing the constant part of the energy projector.
enum class ROperator {
  cell_mean,      // |E|^{-1} int_E v, needs k >= 2
  boundary_mean,  // |dE|^{-1} int_{dE} v
  vertex_mean,    // average of the vertex values
};

BoundaryStab parse_boundary_stab(const std::string& s);
InternalStab parse_internal_stab(const std::string& s);
ROperator parse_r_operator(const std::string& s);
std::string to_string(BoundaryStab s);
std::string to_string(InternalStab s);
std::string to_string(ROperator r);

struct StabChoice {
  BoundaryStab boundary = BoundaryStab::identity;
  InternalStab internal = InternalStab::none;
  ROperator r_operator = ROperator::vertex_mean;
  double tau = 1.0;

  /// Throws std::invalid_argument for tau <= 0 or cell_mean with k = 1.
  void validate(int k) const;
};

/// Scaled monomials m_a(x) = ((x - x_E)/h_E)^a1 ((y - y_E)/h_E)^a2 with |a| <= k,
/// in graded lexicographic order: 1, x, y, x^2, xy, y^2, ...
class MonomialBasis {
public:
  MonomialBasis() = default;
  MonomialBasis(int k, Point center, double h);

  int order() const { return k_; }
  int size() const { return static_cast<int>(exps_.size()); }
  static int dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }
  const std::pair<int, int>& exponent(int i) const { return exps_[i]; }
  /// Position of the exponent pair (a, b) in the ordering.
  static int index(int a, int b) { return dim(a + b - 1) + b; }

  const Point& center() const { return center_; }
  double scale() const { return h_; }

  Point scaled(const Point& x) const { return (x - center_) / h_; }
  /// All monomial values at x (size dim(k)).
  Eigen::VectorXd values(const Point& x) const;
  /// Gradients at x, one row per monomial.
  Eigen::MatrixX2d gradients(const Point& x) const;

private:
  int k_ = 0;
  Point center_ = Point::Zero();
  double h_ = 1.0;
  std::vector<std::pair<int, int>> exps_;
};

/// Local degrees of freedom of V_E:
///   [0, N)                 vertex values, CCW
///   [N, N k)               edge-interior values at the k-1 interior Gauss-Lobatto
///                          nodes, edge by edge, ordered from the edge's start vertex
///   [N k, N k + k(k-1)/2)  moments |E|^{-1} int_E v m_i, |i| <= k-2
class DofLayout {
public:
  DofLayout() = default;
  DofLayout(const ElementGeometry& geom, int k);

  int order() const { return k_; }
  int num_vertices() const { return n_; }
  int num_boundary() const { return n_ * k_; }
  int num_internal() const { return k_ * (k_ - 1) / 2; }
  int size() const { return num_boundary() + num_internal(); }

  int vertex_dof(int i) const { return i; }
  int edge_dof(int e, int j) const { return n_ + e * (k_ - 1) + j; }
  int internal_dof(int i) const { return num_boundary() + i; }

  /// The k+1 dofs along edge e, from its start vertex to its end vertex.
  std::vector<int> edge_dofs(int e) const;
  /// Physical location of each boundary dof.
  const std::vector<Point>& boundary_points() const { return points_; }

private:
  int k_ = 0;
  int n_ = 0;
  std::vector<Point> points_;
};

/// Everything one element needs: geometry, order, basis, dof layout, and exact
/// integrals of scaled monomials over E (computed edge-wise by the divergence
/// theorem, so no quadrature error enters the polynomial Gram matrices).
class LocalSpace {
public:
  LocalSpace(ElementGeometry geom, int k);

  const ElementGeometry& geometry() const { return geom_; }
  int order() const { return k_; }
  const MonomialBasis& basis() const { return basis_; }
  const DofLayout& layout() const { return layout_; }
  int num_dofs() const { return layout_.size(); }

  /// int_E xi^p eta^q dA with xi, eta the scaled coordinates.
  double monomial_integral(int p, int q) const;
  /// L2 Gram of the scaled monomials of degree <= degree.
  Eigen::MatrixXd mass(int degree) const;
  /// int_E grad m_a . grad m_b for |a|,|b| <= k (row/column of the constant vanish).
  Eigen::MatrixXd stiffness() const;
  /// dofs of every monomial of degree <= k, one column per monomial.
  const Eigen::MatrixXd& polynomial_dofs() const { return poly_dofs_; }

  /// Boundary quadrature weights attached to the boundary dofs: the k+1 point
  /// Gauss-Lobatto rule on every edge, which is exact for traces times P_{k-1}.
  const Eigen::VectorXd& boundary_weights() const { return bweights_; }

  /// Evaluates the edge trace of a dof vector at relative position t in [0, 1].
  double edge_trace(const Eigen::VectorXd& dofs, int e, double t) const;

private:
  ElementGeometry geom_;
  int k_;
  MonomialBasis basis_;
  DofLayout layout_;
  Eigen::MatrixXd moments_;  // moments_(p, q) = int_E xi^p eta^q
  Eigen::MatrixXd poly_dofs_;
  Eigen::VectorXd bweights_;
};

DofLayout dof_layout(const ElementGeometry& geom, int k);

/// Row vector r with R v = r . dofs(v).
Eigen::RowVectorXd r_functional(const LocalSpace& space, ROperator choice);
double apply_R(const LocalSpace& space, ROperator choice, const Eigen::VectorXd& dofs);

/// Coefficients (in the monomial basis) of the energy projection of every dof
/// basis function: size dim(k) x n_dof.
Eigen::MatrixXd projector_pi_nabla(const LocalSpace& space, ROperator choice);

/// L2 projection of the gradient onto P_{k-1}: coefficient matrices for the x
/// and y components, each dim(k-1) x n_dof.
struct Pi0Grad {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};
Pi0Grad pi0_gradient(const LocalSpace& space);

struct StabMatrices {
  Eigen::MatrixXd boundary;  // n_dof x n_dof, supported on the boundary block
  Eigen::MatrixXd internal;  // n_dof x n_dof, supported on the internal block
};
/// Stabilization matrices scaled by tau * K_E.
StabMatrices stab_matrix(const LocalSpace& space, const StabChoice& choice, double k_e = 1.0);

struct LocalOperators {
  Eigen::MatrixXd pi_star;  // Pi^nabla in monomial coefficients
  Eigen::MatrixXd pi_dof;   // Pi^nabla expressed back in dofs
  Eigen::MatrixXd s_boundary;
  Eigen::MatrixXd s_internal;
  Eigen::MatrixXd a_h;
  Pi0Grad pi0_grad;
  double k_e = 1.0;
  double tau = 1.0;
};

LocalOperators local_stiffness(const LocalSpace& space, const StabChoice& choice, double k_e = 1.0);

/// Right-hand side <f_h, phi_j>: for k >= 2, int_E f Pi0_{k-2} phi_j (only the
/// moment dofs receive load); for k = 1, (int_E f) times the vertex average of phi_j.
Eigen::VectorXd local_load(const LocalSpace& space, const ScalarField& f);

/// Degrees-of-freedom interpolant of u.
Eigen::VectorXd interpolate(const LocalSpace& space, const ScalarField& u);

/// Value of the polynomial with monomial coefficients `coeffs` at x.
double eval_poly(const MonomialBasis& basis, const Eigen::VectorXd& coeffs, const Point& x);

}  // namespace vemlab
