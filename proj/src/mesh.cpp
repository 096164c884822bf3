#include "vemlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace vemlab {

MeshParseError::MeshParseError(int line, const std::string& what)
    : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

std::string cell_tag(int c) { return "cell " + std::to_string(c); }

}  // namespace

double signed_area(const std::vector<Point>& polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * a;
}

PolyMesh::PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  build_and_validate();
}

bool PolyMesh::cell_edge_forward(int c, int i) const {
  const auto& cyc = cells_[c];
  return cyc[i] < cyc[(i + 1) % cyc.size()];
}

std::vector<Point> PolyMesh::cell_polygon(int c) const {
  std::vector<Point> poly;
  poly.reserve(cells_[c].size());
  for (int v : cells_[c]) poly.push_back(vertices_[v]);
  return poly;
}

void PolyMesh::build_and_validate() {
  const int nv = num_vertices();
  for (int i = 0; i < nv; ++i) {
    if (!std::isfinite(vertices_[i].x()) || !std::isfinite(vertices_[i].y()))
      throw MeshError("vertex " + std::to_string(i) + " has non-finite coordinates");
  }

  std::map<std::pair<int, int>, int> edge_index;
  cell_edges_.assign(cells_.size(), {});
  edges_.clear();

  for (int c = 0; c < num_cells(); ++c) {
    const auto& cyc = cells_[c];
    const int m = static_cast<int>(cyc.size());
    if (m < 3) throw MeshError(cell_tag(c) + " has fewer than 3 vertices");
    for (int v : cyc) {
      if (v < 0 || v >= nv) throw MeshError(cell_tag(c) + " references invalid vertex " + std::to_string(v));
    }
    {
      std::vector<int> sorted = cyc;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw MeshError(cell_tag(c) + " lists a vertex twice");
    }
    const auto poly = cell_polygon(c);
    const double area = signed_area(poly);
    if (!(area > 0.0)) {
      std::ostringstream os;
      os << cell_tag(c) << " is not counter-clockwise (signed area " << area << ")";
      throw MeshError(os.str());
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i + 2; j < m; ++j) {
        if (i == 0 && j == m - 1) continue;
        if (segments_intersect(poly[i], poly[(i + 1) % m], poly[j], poly[(j + 1) % m]))
          throw MeshError(cell_tag(c) + " is not a simple polygon (edges " + std::to_string(i) + " and " +
                          std::to_string(j) + " intersect)");
      }
    }

    auto& ce = cell_edges_[c];
    ce.resize(m);
    for (int i = 0; i < m; ++i) {
      const int a = cyc[i];
      const int b = cyc[(i + 1) % m];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, num_edges());
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.cells = {c, -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] >= 0)
          throw MeshError(cell_tag(c) + ": edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") shared by more than two cells");
        // the neighbour must traverse the edge in the opposite direction
        const auto& other = cells_[e.cells[0]];
        const int mo = static_cast<int>(other.size());
        bool opposite = false;
        for (int j = 0; j < mo; ++j) {
          if (other[j] == b && other[(j + 1) % mo] == a) opposite = true;
        }
        if (!opposite)
          throw MeshError(cell_tag(c) + ": edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") has the same orientation in " + cell_tag(e.cells[0]));
        e.cells[1] = c;
      }
      ce[i] = it->second;
    }
  }

  boundary_vertex_.assign(nv, 0);
  for (const auto& e : edges_) {
    if (e.boundary()) {
      boundary_vertex_[e.v[0]] = 1;
      boundary_vertex_[e.v[1]] = 1;
    }
  }
}

ElementGeometry polygon_geometry(std::vector<Point> polygon) {
  ElementGeometry g;
  g.vertices = std::move(polygon);
  const auto& P = g.vertices;
  const int n = static_cast<int>(P.size());
  if (n < 3) throw MeshError("degenerate polygon: fewer than 3 vertices");

  // shoelace relative to the first vertex to limit cancellation
  double a2 = 0.0;
  Point c = Point::Zero();
  for (int i = 0; i < n; ++i) {
    const Point p = P[i] - P[0];
    const Point q = P[(i + 1) % n] - P[0];
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
  }
  g.area = 0.5 * a2;
  if (!(g.area > 0.0)) throw MeshError("degenerate polygon: non-positive area");
  g.centroid = P[0] + c / (3.0 * a2);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.diameter = std::max(g.diameter, (P[i] - P[j]).norm());

  g.edge_lengths.resize(n);
  g.normals.resize(n);
  g.h_min = std::numeric_limits<double>::infinity();
  g.rho = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Point d = P[(i + 1) % n] - P[i];
    const double len = d.norm();
    if (!(len > 0.0)) throw MeshError("degenerate polygon: zero-length edge");
    g.edge_lengths[i] = len;
    g.normals[i] = Point(d.y(), -d.x()) / len;
    g.perimeter += len;
    g.h_min = std::min(g.h_min, len);
    g.rho = std::min(g.rho, std::abs(g.normals[i].dot(g.centroid - P[i])));
  }
  return g;
}

ElementGeometry element_geometry(const PolyMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.num_cells()) throw std::out_of_range("cell index out of range");
  return polygon_geometry(mesh.cell_polygon(cell));
}

MeshQualityReport quality_report(const PolyMesh& mesh) {
  MeshQualityReport r;
  r.gamma_min = std::numeric_limits<double>::infinity();
  r.eta_min = std::numeric_limits<double>::infinity();
  r.min_edge = std::numeric_limits<double>::infinity();
  double dsum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto g = element_geometry(mesh, c);
    r.gamma_min = std::min(r.gamma_min, g.rho / g.diameter);
    r.n_max = std::max(r.n_max, g.num_edges());
    r.eta_min = std::min(r.eta_min, g.h_min / g.diameter);
    r.log_factor = std::max(r.log_factor, std::log1p(g.diameter / g.h_min));
    r.min_edge = std::min(r.min_edge, g.h_min);
    dsum += g.diameter;
  }
  r.mean_diameter = mesh.num_cells() > 0 ? dsum / mesh.num_cells() : 0.0;
  return r;
}

namespace {

// Yields non-empty, comment-stripped lines together with their 1-based numbers.
class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }
  int line() const { return lineno_; }

private:
  std::istream& in_;
  int lineno_ = 0;
};

void expect_end(std::istringstream& ls, int line) {
  std::string extra;
  if (ls >> extra) throw MeshParseError(line, "unexpected trailing token '" + extra + "'");
}

}  // namespace

PolyMesh read_mesh(std::istream& in) {
  LineReader reader(in);
  std::istringstream ls;
  if (!reader.next(ls)) throw MeshParseError(reader.line(), "missing header 'nv nc'");
  long nv = -1, nc = -1;
  if (!(ls >> nv >> nc) || nv < 3 || nc < 1) throw MeshParseError(reader.line(), "invalid header, expected 'nv nc'");
  expect_end(ls, reader.line());

  std::vector<Point> verts(nv);
  for (long i = 0; i < nv; ++i) {
    if (!reader.next(ls)) throw MeshParseError(reader.line(), "unexpected end of file in vertex block");
    double x, y;
    if (!(ls >> x >> y)) throw MeshParseError(reader.line(), "expected vertex coordinates 'x y'");
    expect_end(ls, reader.line());
    verts[i] = Point(x, y);
  }
  std::vector<std::vector<int>> cells(nc);
  for (long c = 0; c < nc; ++c) {
    if (!reader.next(ls)) throw MeshParseError(reader.line(), "unexpected end of file in cell block");
    long m;
    if (!(ls >> m) || m < 3) throw MeshParseError(reader.line(), "expected cell vertex count >= 3");
    cells[c].resize(m);
    for (long j = 0; j < m; ++j) {
      long idx;
      if (!(ls >> idx)) throw MeshParseError(reader.line(), "cell has fewer indices than declared");
      if (idx < 0 || idx >= nv) throw MeshParseError(reader.line(), "vertex index out of range");
      cells[c][j] = static_cast<int>(idx);
    }
    expect_end(ls, reader.line());
  }
  if (reader.next(ls)) throw MeshParseError(reader.line(), "trailing content after cell block");
  return PolyMesh(std::move(verts), std::move(cells));
}

PolyMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path.string() + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const PolyMesh& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& cyc : mesh.cells()) {
    out << cyc.size();
    for (int v : cyc) out << ' ' << v;
    out << '\n';
  }
}

void save_mesh(const std::filesystem::path& path, const PolyMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file '" + path.string() + "'");
  write_mesh(out, mesh);
}

}  // namespace vemlab
