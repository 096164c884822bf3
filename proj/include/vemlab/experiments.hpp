#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vemlab/diagnostics.hpp"
#include "vemlab/meshgen.hpp"
#include "vemlab/system.hpp"
#include "vemlab/vem.hpp"

namespace vemlab {

/// Manufactured solution with closed-form gradient and f = -Laplace(u).
struct ExactSolution {
  std::string name;
  ScalarField u;
  VectorField grad;
  ScalarField f;
  int degree = -1;  // polynomial degree, -1 if not a polynomial
};

/// u = x^3 - x y^2 + x^2 y + x^2 - x y - x + y - 1 + sin(5x) sin(7y) + log(1 + x^2 + y^4)
ExactSolution paper_solution();
/// Fixed polynomial of total degree d with all monomials present.
ExactSolution polynomial_solution(int d);
/// "paper6" or "poly:<d>".
ExactSolution parse_solution(const std::string& spec);

struct ExperimentConfig {
  std::string command;
  GenSpec gen;
  std::string mesh_path;  // overrides the generator when set
  int k = 1;
  StabChoice stab;
  std::string solution = "paper6";
  int levels = -1;  // number of refinement levels to run, -1 for all

  /// Throws std::invalid_argument.
  void validate() const;
  /// One-line key=value summary embedded in CSV headers.
  std::string describe() const;
};

struct SolveResult {
  Eigen::VectorXd uh;
  ErrorReport errors;
  SolveStats stats;
};

/// Assembles, solves (Dirichlet data from u) and measures the errors.
SolveResult solve_problem(const PolyMesh& mesh, int k, const StabChoice& stab, const ExactSolution& sol,
                          const CellCoefficients& kappa = {});

/// Mesh sequence used by the convergence study of a family.
std::vector<GenSpec> refinement_sequence(MeshFamily family, std::uint64_t seed);

struct ConvergenceRow {
  std::string family;
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  double h1_error = 0.0;
  double l2_error = 0.0;
  std::optional<double> rate;  // H1 rate against the previous level
};

struct SmallEdgeRow {
  std::string stab;
  double tau = 1.0;
  int k = 1;
  double oscillation = 0.0;
  double h1_error = 0.0;
  int cg_iterations = 0;
};

struct SweepRow {
  double eps = 0.0;  // 0 for the unsplit square
  std::string stab;
  int k = 1;
  double c2 = 0.0;
  double h12_ratio = 0.0;
  double log_factor = 0.0;
};

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config);
std::vector<SmallEdgeRow> run_small_edge(const ExperimentConfig& config);
std::vector<SweepRow> run_stability_sweep(const ExperimentConfig& config);

/// Split fractions of the stability sweep.
const std::vector<double>& sweep_eps();

/// git-describe style identifier baked in at configure time.
std::string build_id();

void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<ConvergenceRow>& rows);
void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<SmallEdgeRow>& rows);
void write_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<SweepRow>& rows);

}  // namespace vemlab
