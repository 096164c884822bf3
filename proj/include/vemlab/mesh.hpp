#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vemlab {

using Point = Eigen::Vector2d;

/// Raised for malformed mesh files and for meshes violating the polygon invariants.
class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with the 1-based line number of the offending line.
class MeshParseError : public MeshError {
public:
  MeshParseError(int line, const std::string& what);
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// Absolute geometric tolerance on the unit-square domain.
inline constexpr double kGeomTol = 1e-12;

/// Undirected mesh edge; v[0] < v[1]. cells[1] is -1 on the boundary.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> cells{-1, -1};
  bool boundary() const { return cells[1] < 0; }
};

/// Conforming polygonal mesh. Cells are CCW vertex cycles; consecutive collinear
/// vertices are allowed and each segment between listed vertices is an edge.
/// Immutable after construction; the constructor validates every invariant.
class PolyMesh {
public:
  PolyMesh() = default;
  PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[i]; }
  const std::vector<std::vector<int>>& cells() const { return cells_; }
  const std::vector<int>& cell(int c) const { return cells_[c]; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool is_boundary_vertex(int i) const { return boundary_vertex_[i] != 0; }

  /// Global edge index of the local edge `i` of cell `c` (from vertex i to i+1).
  int cell_edge(int c, int i) const { return cell_edges_[c][i]; }
  /// True when the local edge runs from the lower to the higher vertex index.
  bool cell_edge_forward(int c, int i) const;

  std::vector<Point> cell_polygon(int c) const;

private:
  void build_and_validate();

  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<char> boundary_vertex_;
};

/// Per-cell geometric quantities. The centroid doubles as the star center;
/// rho is the distance from it to the nearest edge supporting line, so it is
/// an estimate of the true star radius (exact for convex cells).
struct ElementGeometry {
  std::vector<Point> vertices;
  double diameter = 0.0;  // h_E
  double area = 0.0;
  Point centroid = Point::Zero();
  double rho = 0.0;
  double perimeter = 0.0;
  double h_min = 0.0;
  std::vector<double> edge_lengths;
  std::vector<Point> normals;  // outward, unit

  int num_edges() const { return static_cast<int>(vertices.size()); }
};

ElementGeometry polygon_geometry(std::vector<Point> polygon);
ElementGeometry element_geometry(const PolyMesh& mesh, int cell);

struct MeshQualityReport {
  double gamma_min = 0.0;   // min rho/h_E
  int n_max = 0;            // max edge count
  double eta_min = 0.0;     // min h_min/h_E
  double log_factor = 0.0;  // max log(1 + h_E/h_min)
  double min_edge = 0.0;    // shortest edge over the mesh
  double mean_diameter = 0.0;
};

MeshQualityReport quality_report(const PolyMesh& mesh);

double signed_area(const std::vector<Point>& polygon);

PolyMesh read_mesh(std::istream& in);
PolyMesh load_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const PolyMesh& mesh);
void save_mesh(const std::filesystem::path& path, const PolyMesh& mesh);

}  // namespace vemlab
