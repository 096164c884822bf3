#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vemlab/mesh.hpp"

namespace vemlab {

enum class MeshFamily { square, hexagon, voronoi, lloyd, glued, edge_split };

MeshFamily parse_family(const std::string& name);
std::string to_string(MeshFamily family);

/// Resolution parameters for one generated mesh. Which fields are read depends
/// on `family`; see generate().
struct GenSpec {
  MeshFamily family = MeshFamily::square;
  int n = 4;            // square: n x n; voronoi/lloyd: number of sites; edge_split: base grid n x n
  int nx = 8, ny = 10;  // hexagon columns/rows; glued: left/right row counts
  int lloyd_iters = 0;  // voronoi only (lloyd family uses 100)
  double eps = 0.5;     // edge_split: relative split position
  std::uint64_t seed = 1;

  void validate() const;
};

PolyMesh generate(const GenSpec& spec);

/// n x n uniform squares on the unit square.
PolyMesh gen_square(int n);

/// Voronoi diagram of a staggered nx x ny lattice of sites (rows shifted by half a
/// column), clipped to the unit square. Interior cells are (almost) regular
/// hexagons, boundary cells are clipped to quadrilaterals/pentagons; the cell
/// count is exactly nx * ny.
PolyMesh gen_hexagon(int nx, int ny);

/// Voronoi diagram of `n` uniformly sampled sites in the unit square followed by
/// `lloyd_iters` Lloyd iterations (sites moved to cell centroids).
PolyMesh gen_voronoi(int n, std::uint64_t seed, int lloyd_iters);

/// Voronoi diagram of explicit sites, clipped to the unit square. Coincident
/// sites are separated by a tiny deterministic jitter.
PolyMesh voronoi_mesh(std::vector<Point> sites, std::uint64_t seed = 0);

/// Uniformly sampled sites for gen_voronoi (bit-reproducible across platforms).
std::vector<Point> random_sites(int n, std::uint64_t seed);

/// One Lloyd step: returns the centroids of the Voronoi cells of `sites`.
std::vector<Point> lloyd_step(const std::vector<Point>& sites);

/// CVT energy sum_i int_{V_i} |x - s_i|^2 for the Voronoi diagram of `sites`.
double cvt_energy(const std::vector<Point>& sites);

/// Two independent grids on [0,1/2]x[0,1] (left_ny rows) and [1/2,1]x[0,1]
/// (right_ny rows), each with max(1, round(ny/2)) columns, glued along x = 1/2.
/// The interface vertices of each side become collinear vertices of the cells on
/// the other side. Requires left_ny != right_ny.
PolyMesh gen_glued(int left_ny, int right_ny);

/// Inserts a vertex at relative position eps (0 < eps <= 1/2) along the local edge
/// `edge` of `cell`, measured from the edge's start vertex, in every incident cell.
PolyMesh split_edge(const PolyMesh& mesh, int cell, int edge, double eps);

/// Builds a conforming mesh from independent polygons: coincident points are
/// merged within `tol` and every vertex lying inside another cell's edge is
/// inserted into that edge.
PolyMesh mesh_from_polygons(const std::vector<std::vector<Point>>& polygons, double tol = 1e-11);

}  // namespace vemlab
