// Experiment driver: mesh generation, convergence tables, small-edge runs and
// stability sweeps. CSV goes to --out (or stdout); progress goes to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "vemlab/experiments.hpp"
#include "vemlab/mesh.hpp"
#include "vemlab/meshgen.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct Options {
  int k = 1;
  std::string stab = "identity";
  std::string internal = "none";
  std::string r_op = "vertex";
  double tau = 1.0;
  std::string mesh;
  std::string family;
  int n = -1;
  int nx = -1, ny = -1;
  std::uint64_t seed = 1;
  int lloyd_iters = 0;
  double eps = 0.5;
  std::string solution = "paper6";
  int levels = -1;
  std::string out;
};

void add_mesh_flags(CLI::App* app, Options& o) {
  app->add_option("--family", o.family, "square|hexagon|voronoi|lloyd|glued|edge_split");
  app->add_option("--n", o.n, "grid size or number of Voronoi sites");
  app->add_option("--nx", o.nx, "hexagon columns / glued left rows");
  app->add_option("--ny", o.ny, "hexagon rows / glued right rows");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--lloyd-iters", o.lloyd_iters, "Lloyd iterations (voronoi family)");
  app->add_option("--eps", o.eps, "relative split position (edge_split family)");
  app->add_option("--out", o.out, "output path (default stdout)");
}

void add_solver_flags(CLI::App* app, Options& o) {
  app->add_option("--k", o.k, "polynomial order 1..5");
  app->add_option("--stab", o.stab, "identity|tangential|l2edge");
  app->add_option("--internal-stab", o.internal, "moments|none");
  app->add_option("--r-op", o.r_op, "cell|boundary|vertex");
  app->add_option("--tau", o.tau, "stabilization scaling");
  app->add_option("--mesh", o.mesh, "mesh file (overrides the generator)");
  app->add_option("--solution", o.solution, "paper6|poly:<d>");
}

vemlab::GenSpec gen_spec(const Options& o, vemlab::MeshFamily default_family) {
  vemlab::GenSpec g;
  g.family = o.family.empty() ? default_family : vemlab::parse_family(o.family);
  if (g.family == vemlab::MeshFamily::glued) {
    g.nx = 53;
    g.ny = 58;
  }
  if (o.n > 0) g.n = o.n;
  if (o.nx > 0) g.nx = o.nx;
  if (o.ny > 0) g.ny = o.ny;
  g.seed = o.seed;
  g.lloyd_iters = o.lloyd_iters;
  g.eps = o.eps;
  return g;
}

vemlab::ExperimentConfig config_from(const std::string& command, const Options& o,
                                     vemlab::MeshFamily default_family) {
  vemlab::ExperimentConfig c;
  c.command = command;
  c.gen = gen_spec(o, default_family);
  c.mesh_path = o.mesh;
  c.k = o.k;
  c.stab.boundary = vemlab::parse_boundary_stab(o.stab);
  c.stab.internal = vemlab::parse_internal_stab(o.internal);
  c.stab.r_operator = vemlab::parse_r_operator(o.r_op);
  c.stab.tau = o.tau;
  c.solution = o.solution;
  c.levels = o.levels;
  c.validate();
  return c;
}

// Writes to --out, or stdout when it is empty.
template <class Fn>
void emit(const std::string& out, Fn&& write) {
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::invalid_argument("cannot open output file '" + out + "'");
  write(f);
  if (!f) throw std::runtime_error("failed writing '" + out + "'");
}

void print_quality(const vemlab::PolyMesh& mesh) {
  const auto q = vemlab::quality_report(mesh);
  std::fprintf(stderr, "cells %d, vertices %d, edges %d\n", mesh.num_cells(), mesh.num_vertices(), mesh.num_edges());
  std::fprintf(stderr, "gamma_min %.4g  N_max %d  eta_min %.4g  min_edge %.4g  log_factor %.4g  mean_h %.4g\n",
               q.gamma_min, q.n_max, q.eta_min, q.min_edge, q.log_factor, q.mean_diameter);
  std::fprintf(stderr, "A1 (uniformly star-shaped): %s\n", q.gamma_min >= 0.05 ? "plausible" : "doubtful");
  std::fprintf(stderr, "A2 (bounded edge count):    %s\n", q.n_max <= 12 ? "plausible" : "doubtful");
  std::fprintf(stderr, "A3 (no small edges):        %s\n", q.eta_min >= 0.05 ? "plausible" : "violated");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element experiments on polygonal meshes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vemlab::build_id());
  Options o;

  auto* meshgen = app.add_subcommand("meshgen", "generate a mesh file");
  add_mesh_flags(meshgen, o);

  auto* conv = app.add_subcommand("convergence", "H1 error over a refinement sequence");
  add_mesh_flags(conv, o);
  add_solver_flags(conv, o);
  conv->add_option("--levels", o.levels, "number of refinement levels (default all)");

  auto* small = app.add_subcommand("small-edge", "oscillations on the glued mesh");
  add_mesh_flags(small, o);
  add_solver_flags(small, o);

  auto* sweep = app.add_subcommand("stab-sweep", "stability constants on a split square");
  sweep->add_option("--out", o.out, "output path (default stdout)");
  add_solver_flags(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (meshgen->parsed()) {
      const auto spec = gen_spec(o, vemlab::MeshFamily::square);
      const auto mesh = vemlab::generate(spec);
      print_quality(mesh);
      emit(o.out, [&](std::ostream& os) { vemlab::write_mesh(os, mesh); });
    } else if (conv->parsed()) {
      const auto cfg = config_from("convergence", o, vemlab::MeshFamily::square);
      const auto rows = vemlab::run_convergence(cfg);
      emit(o.out, [&](std::ostream& os) { vemlab::write_csv(os, cfg, rows); });
    } else if (small->parsed()) {
      const auto cfg = config_from("small-edge", o, vemlab::MeshFamily::glued);
      const auto rows = vemlab::run_small_edge(cfg);
      emit(o.out, [&](std::ostream& os) { vemlab::write_csv(os, cfg, rows); });
    } else if (sweep->parsed()) {
      const auto cfg = config_from("stab-sweep", o, vemlab::MeshFamily::edge_split);
      const auto rows = vemlab::run_stability_sweep(cfg);
      emit(o.out, [&](std::ostream& os) { vemlab::write_csv(os, cfg, rows); });
    }
  } catch (const vemlab::SolveError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const vemlab::MeshError& e) {
    std::fprintf(stderr, "invalid mesh: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
