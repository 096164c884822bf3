#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "vemlab/mesh.hpp"
#include "vemlab/vem.hpp"

namespace vemlab {

struct ErrorReport {
  double h1_error = 0.0;  // broken H1 seminorm through Pi0_{k-1} grad u_h
  double l2_error = 0.0;  // through Pi^nabla u_h
  double mean_diameter = 0.0;
  int num_dofs = 0;
};

/// sqrt(sum_E int_E |grad u - Pi0_{k-1} grad u_h|^2), degree 2k+6 quadrature.
double h1_error(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const VectorField& grad_u);

/// sqrt(sum_E int_E (u - Pi^nabla u_h)^2).
double l2_error(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const ScalarField& u,
                ROperator r = ROperator::vertex_mean);

ErrorReport error_report(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, const ScalarField& u,
                         const VectorField& grad_u, ROperator r = ROperator::vertex_mean);

/// Global dof interpolant of u on the whole mesh.
Eigen::VectorXd interpolate_global(const PolyMesh& mesh, int k, const ScalarField& u);

inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

/// rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}); a zero error gives kInfiniteRate.
std::vector<double> convergence_rate(const std::vector<double>& errors, const std::vector<double>& hs);

struct C2Probe {
  double c2 = 0.0;        // largest eigenvalue of s_E((I-R)p,(I-R)p) vs a_E(p,p), p in P_k / P_0
  double residual = 0.0;  // relative residual of the eigenpair
};

/// Measures the constant in s_E((I-R)p,(I-R)p) <= C a_E(p,p) over P_k modulo constants.
C2Probe c2_probe(const LocalSpace& space, const StabChoice& choice, double k_e = 1.0);

/// Piecewise polynomial functions on a closed polygonal boundary. Edge e runs
/// from vertices[e] to vertices[e+1]; each function is given on it by its values
/// at the k+1 Gauss-Lobatto nodes (one row per function).
struct BoundaryTraces {
  std::vector<Point> vertices;
  int order = 1;
  std::vector<Eigen::MatrixXd> edge_values;
  int num_functions() const { return edge_values.empty() ? 0 : static_cast<int>(edge_values[0].rows()); }
};

/// Boundary trace of a local dof vector (one function).
BoundaryTraces trace_from_dofs(const LocalSpace& space, const Eigen::VectorXd& dofs);
/// Traces of the boundary nodal basis of V_E (one function per boundary dof).
BoundaryTraces nodal_boundary_basis(const LocalSpace& space);

/// Gram matrix of the double-integral H^{1/2} seminorm
///   int_dE int_dE (v(x) - v(y)) (w(x) - w(y)) / |x - y|^2 ds_x ds_y
/// over the given functions. Throws std::invalid_argument for traces that are
/// discontinuous at a vertex.
Eigen::MatrixXd h12_gram(const BoundaryTraces& traces);

/// |v|^2_{1/2, dE} of a single boundary trace.
double h12_seminorm(const BoundaryTraces& trace);

/// Largest |v|^2_{1/2}/||v||^2_{L-inf} over boundary traces whose boundary dofs
/// are all +-1 (for k = 1: the piecewise-linear nodal traces).
double h12_linf_ratio(const ElementGeometry& geom, int k);

struct LogBoundRow {
  double eps = 0.0;  // 0 for the unsplit square
  double ratio = 0.0;
  double log_factor = 0.0;
  double normalized = 0.0;  // ratio / log_factor
};

/// Unit square with its bottom edge split at relative position eps.
ElementGeometry split_square_geometry(double eps);

/// One row per eps (eps in (0, 1/2]) plus a leading baseline row for the unsplit square.
std::vector<LogBoundRow> log_bound_check(const std::vector<double>& eps_sweep, int k);

struct SectionSample {
  double y = 0.0;
  double value = 0.0;
  bool on_edge = false;
};

/// Values of u_h along the vertical line x = x0 at n uniform heights in [0, 1]:
/// the edge trace where the point lies on an edge, Pi^nabla u_h elsewhere.
std::vector<SectionSample> section_sample(const PolyMesh& mesh, int k, const Eigen::VectorXd& uh, double x0, int n,
                                          ROperator r = ROperator::vertex_mean);

/// max_i |value_i - u(x0, y_i)|.
double oscillation_metric(const std::vector<SectionSample>& samples, const ScalarField& u, double x0);

}  // namespace vemlab
