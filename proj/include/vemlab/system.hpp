#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "vemlab/mesh.hpp"
#include "vemlab/vem.hpp"

namespace vemlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Global numbering: vertices first, then k-1 dofs per edge (ordered from the
/// lower to the higher vertex index), then k(k-1)/2 moments per cell.
class GlobalDofMap {
public:
  GlobalDofMap(const PolyMesh& mesh, int k);

  int order() const { return k_; }
  int size() const { return total_; }
  int vertex_dof(int v) const { return v; }
  int edge_dof(int e, int j) const { return nv_ + e * (k_ - 1) + j; }
  int cell_dof(int c, int i) const { return nv_ + ne_ * (k_ - 1) + c * nint_ + i; }

  /// Local-to-global map of cell c, following DofLayout's ordering.
  std::vector<int> cell_dofs(const PolyMesh& mesh, int c) const;

  bool is_boundary(int dof) const { return boundary_[dof] != 0; }
  const std::vector<int>& boundary_dofs() const { return boundary_list_; }
  /// Physical location of every vertex/edge dof (cell dofs map to the centroid).
  const std::vector<Point>& locations() const { return locations_; }

private:
  int k_;
  int nv_, ne_, nint_;
  int total_;
  std::vector<char> boundary_;
  std::vector<int> boundary_list_;
  std::vector<Point> locations_;
};

GlobalDofMap build_dof_map(const PolyMesh& mesh, int k);

/// Reduced SPD system over the free dofs plus the data to rebuild the full vector.
struct SparseSystem {
  SparseMatrix matrix;          // free x free, symmetric
  Eigen::VectorXd rhs;          // free
  std::vector<int> free_dofs;   // reduced index -> global dof
  Eigen::VectorXd dirichlet;    // full length; values on constrained dofs, zero elsewhere
  int num_dofs() const { return static_cast<int>(dirichlet.size()); }
};

/// Per-cell diffusion coefficient; empty means K = 1 everywhere.
using CellCoefficients = std::vector<double>;

/// Full (unconstrained) stiffness matrix and load vector.
struct AssembledOperator {
  SparseMatrix matrix;
  Eigen::VectorXd load;
};

AssembledOperator assemble_operator(const PolyMesh& mesh, const GlobalDofMap& map, const StabChoice& choice,
                                    const CellCoefficients& kappa, const ScalarField& f);

/// Assembles a^h and <f_h, .>, then eliminates the boundary dofs symmetrically
/// with values g at the boundary dof locations.
SparseSystem assemble(const PolyMesh& mesh, int k, const StabChoice& choice, const CellCoefficients& kappa,
                      const ScalarField& f, const ScalarField& g);

class SolveError : public std::runtime_error {
public:
  SolveError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Called after every CG iteration with the current iterate.
using CgObserver = std::function<void(int iteration, const Eigen::VectorXd& x)>;

/// Jacobi-preconditioned conjugate gradients on an SPD matrix; stops at
/// ||r|| <= tol ||b|| or throws SolveError after max_iter (default 50 n).
Eigen::VectorXd pcg(const SparseMatrix& a, const Eigen::VectorXd& b, double tol = 1e-12, int max_iter = -1,
                    SolveStats* stats = nullptr, const CgObserver& observer = {});

/// Solves the reduced system and returns the full dof vector (Dirichlet values included).
Eigen::VectorXd solve(const SparseSystem& system, double tol = 1e-12, SolveStats* stats = nullptr);

}  // namespace vemlab
