#include "vemlab/system.hpp"

#include <cmath>
#include <sstream>

#include "vemlab/quadrature.hpp"

namespace vemlab {

GlobalDofMap::GlobalDofMap(const PolyMesh& mesh, int k)
    : k_(k), nv_(mesh.num_vertices()), ne_(mesh.num_edges()), nint_(k * (k - 1) / 2) {
  if (k < 1) throw std::invalid_argument("GlobalDofMap: k must be >= 1");
  total_ = nv_ + (k - 1) * ne_ + nint_ * mesh.num_cells();
  boundary_.assign(total_, 0);
  locations_.assign(total_, Point::Zero());

  for (int v = 0; v < nv_; ++v) {
    locations_[v] = mesh.vertex(v);
    if (mesh.is_boundary_vertex(v)) boundary_[v] = 1;
  }
  if (k >= 2) {
    // interior Gauss-Lobatto nodes, traversed from the lower to the higher vertex index
    const auto& gll = gauss_lobatto(k + 1);
    for (int e = 0; e < ne_; ++e) {
      const Edge& ed = mesh.edges()[e];
      const Point a = mesh.vertex(ed.v[0]), b = mesh.vertex(ed.v[1]);
      for (int j = 0; j < k - 1; ++j) {
        locations_[edge_dof(e, j)] = a + 0.5 * (gll.nodes[j + 1] + 1.0) * (b - a);
        if (ed.boundary()) boundary_[edge_dof(e, j)] = 1;
      }
    }
  }
  if (nint_ > 0) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Point centroid = polygon_geometry(mesh.cell_polygon(c)).centroid;
      for (int i = 0; i < nint_; ++i) locations_[cell_dof(c, i)] = centroid;
    }
  }
  for (int d = 0; d < total_; ++d)
    if (boundary_[d]) boundary_list_.push_back(d);
}

std::vector<int> GlobalDofMap::cell_dofs(const PolyMesh& mesh, int c) const {
  const auto& cyc = mesh.cell(c);
  const int n = static_cast<int>(cyc.size());
  std::vector<int> dofs;
  dofs.reserve(n * k_ + nint_);
  for (int v : cyc) dofs.push_back(vertex_dof(v));
  for (int i = 0; i < n; ++i) {
    const int e = mesh.cell_edge(c, i);
    const bool fwd = mesh.cell_edge_forward(c, i);
    for (int j = 0; j < k_ - 1; ++j) dofs.push_back(edge_dof(e, fwd ? j : k_ - 2 - j));
  }
  for (int i = 0; i < nint_; ++i) dofs.push_back(cell_dof(c, i));
  return dofs;
}

GlobalDofMap build_dof_map(const PolyMesh& mesh, int k) { return GlobalDofMap(mesh, k); }

AssembledOperator assemble_operator(const PolyMesh& mesh, const GlobalDofMap& map, const StabChoice& choice,
                                    const CellCoefficients& kappa, const ScalarField& f) {
  const int k = map.order();
  choice.validate(k);
  if (!kappa.empty() && static_cast<int>(kappa.size()) != mesh.num_cells())
    throw std::invalid_argument("assemble: one diffusion coefficient per cell expected");

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd load = Eigen::VectorXd::Zero(map.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double k_e = kappa.empty() ? 1.0 : kappa[c];
    const LocalSpace space(element_geometry(mesh, c), k);
    const auto ops = local_stiffness(space, choice, k_e);
    const auto dofs = map.cell_dofs(mesh, c);
    const int nd = static_cast<int>(dofs.size());
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) trips.emplace_back(dofs[i], dofs[j], ops.a_h(i, j));
    if (f) {
      const Eigen::VectorXd fl = local_load(space, f);
      for (int i = 0; i < nd; ++i) load[dofs[i]] += fl[i];
    }
  }
  AssembledOperator op;
  op.matrix.resize(map.size(), map.size());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.load = std::move(load);
  return op;
}

SparseSystem assemble(const PolyMesh& mesh, int k, const StabChoice& choice, const CellCoefficients& kappa,
                      const ScalarField& f, const ScalarField& g) {
  const GlobalDofMap map(mesh, k);
  const auto op = assemble_operator(mesh, map, choice, kappa, f);

  SparseSystem sys;
  sys.dirichlet = Eigen::VectorXd::Zero(map.size());
  std::vector<int> reduced(map.size(), -1);
  for (int d = 0; d < map.size(); ++d) {
    if (map.is_boundary(d)) {
      sys.dirichlet[d] = g ? g(map.locations()[d]) : 0.0;
    } else {
      reduced[d] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(d);
    }
  }
  const int nf = static_cast<int>(sys.free_dofs.size());
  // move the constrained columns to the right-hand side
  const Eigen::VectorXd lifted = op.matrix * sys.dirichlet;
  sys.rhs.resize(nf);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(op.matrix.nonZeros());
  for (int i = 0; i < nf; ++i) {
    const int gi = sys.free_dofs[i];
    sys.rhs[i] = op.load[gi] - lifted[gi];
    for (SparseMatrix::InnerIterator it(op.matrix, gi); it; ++it) {
      const int rj = reduced[it.col()];
      if (rj >= 0) trips.emplace_back(i, rj, it.value());
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::VectorXd pcg(const SparseMatrix& a, const Eigen::VectorXd& b, double tol, int max_iter, SolveStats* stats,
                    const CgObserver& observer) {
  const int n = static_cast<int>(b.size());
  if (max_iter < 0) max_iter = 50 * std::max(n, 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (stats) *stats = {};
  if (bnorm == 0.0) return x;

  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    if (!(d > 0.0)) throw SolveError("pcg: non-positive diagonal entry (matrix not SPD)", 1.0, 0);
    dinv[i] = 1.0 / d;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  int it = 0;
  double rel = 1.0;
  for (; it < max_iter; ++it) {
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      std::ostringstream os;
      os << "pcg: non-positive curvature at iteration " << it << " (matrix not SPD)";
      throw SolveError(os.str(), rel, it);
    }
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    rel = r.norm() / bnorm;
    if (observer) observer(it + 1, x);
    if (rel <= tol) {
      ++it;
      break;
    }
    z = dinv.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (stats) *stats = {it, rel};
  if (rel > tol) {
    std::ostringstream os;
    os << "pcg: no convergence after " << it << " iterations (relative residual " << rel << ")";
    throw SolveError(os.str(), rel, it);
  }
  return x;
}

Eigen::VectorXd solve(const SparseSystem& system, double tol, SolveStats* stats) {
  Eigen::VectorXd full = system.dirichlet;
  if (system.free_dofs.empty()) return full;
  const Eigen::VectorXd xf = pcg(system.matrix, system.rhs, tol, -1, stats);
  for (int i = 0; i < static_cast<int>(system.free_dofs.size()); ++i) full[system.free_dofs[i]] = xf[i];
  return full;
}

}  // namespace vemlab
