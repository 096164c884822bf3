#include "vemlab/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Geometry>

#include "vemlab/quadrature.hpp"

namespace vemlab {

MeshFamily parse_family(const std::string& name) {
  if (name == "square") return MeshFamily::square;
  if (name == "hexagon") return MeshFamily::hexagon;
  if (name == "voronoi" || name == "lloyd0" || name == "Lloyd-0") return MeshFamily::voronoi;
  if (name == "lloyd" || name == "lloyd100" || name == "Lloyd-100") return MeshFamily::lloyd;
  if (name == "glued") return MeshFamily::glued;
  if (name == "edge_split" || name == "edge-split") return MeshFamily::edge_split;
  throw std::invalid_argument("unknown mesh family '" + name + "'");
}

std::string to_string(MeshFamily family) {
  switch (family) {
    case MeshFamily::square: return "square";
    case MeshFamily::hexagon: return "hexagon";
    case MeshFamily::voronoi: return "voronoi";
    case MeshFamily::lloyd: return "lloyd";
    case MeshFamily::glued: return "glued";
    case MeshFamily::edge_split: return "edge_split";
  }
  return "?";
}

void GenSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("GenSpec: " + m); };
  switch (family) {
    case MeshFamily::square:
      if (n < 1) fail("square needs n >= 1");
      break;
    case MeshFamily::hexagon:
      if (nx < 2 || ny < 2) fail("hexagon needs nx, ny >= 2");
      break;
    case MeshFamily::voronoi:
    case MeshFamily::lloyd:
      if (n < 2) fail("voronoi needs n >= 2");
      if (lloyd_iters < 0) fail("lloyd_iters must be >= 0");
      break;
    case MeshFamily::glued:
      if (nx < 1 || ny < 1) fail("glued needs positive row counts");
      if (nx == ny) fail("glued needs different left/right row counts");
      break;
    case MeshFamily::edge_split:
      if (n < 1) fail("edge_split needs n >= 1");
      if (!(eps > 0.0 && eps <= 0.5)) fail("eps must lie in (0, 1/2]");
      break;
  }
}

PolyMesh generate(const GenSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case MeshFamily::square: return gen_square(spec.n);
    case MeshFamily::hexagon: return gen_hexagon(spec.nx, spec.ny);
    case MeshFamily::voronoi: return gen_voronoi(spec.n, spec.seed, spec.lloyd_iters);
    case MeshFamily::lloyd: return gen_voronoi(spec.n, spec.seed, 100);
    case MeshFamily::glued: return gen_glued(spec.nx, spec.ny);
    case MeshFamily::edge_split: {
      // split the bottom edge of a central cell; interior whenever n >= 2
      const int c = (spec.n / 2) * spec.n + spec.n / 2;
      return split_edge(gen_square(spec.n), c, 0, spec.eps);
    }
  }
  throw std::logic_error("unreachable");
}

PolyMesh gen_square(int n) {
  if (n < 1) throw std::invalid_argument("gen_square: n must be >= 1");
  std::vector<Point> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(double(i) / n, double(j) / n);
  std::vector<std::vector<int>> cells;
  cells.reserve(n * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return PolyMesh(std::move(verts), std::move(cells));
}

namespace {

using Polygon = std::vector<Point>;

Polygon unit_square() { return {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}; }

// Keeps the part of `poly` with normal.dot(x) <= offset.
Polygon clip_halfplane(const Polygon& poly, const Point& normal, double offset) {
  Polygon out;
  const int m = static_cast<int>(poly.size());
  out.reserve(m + 1);
  for (int i = 0; i < m; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % m];
    const double dp = normal.dot(p) - offset;
    const double dq = normal.dot(q) - offset;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

// Uniform bucket grid over the unit square for neighbour search.
class SiteGrid {
public:
  explicit SiteGrid(const std::vector<Point>& sites)
      : g_(std::max(1, static_cast<int>(std::sqrt(sites.size() / 2.0)))), buckets_(g_ * g_) {
    for (int i = 0; i < static_cast<int>(sites.size()); ++i) {
      buckets_[index(bucket(sites[i].x()), bucket(sites[i].y()))].push_back(i);
    }
  }
  int size() const { return g_; }
  double width() const { return 1.0 / g_; }
  int bucket(double t) const { return std::clamp(static_cast<int>(t * g_), 0, g_ - 1); }
  const std::vector<int>& at(int bx, int by) const { return buckets_[index(bx, by)]; }

private:
  int index(int bx, int by) const { return by * g_ + bx; }
  int g_;
  std::vector<std::vector<int>> buckets_;
};

std::vector<Polygon> voronoi_cells(const std::vector<Point>& sites) {
  const int n = static_cast<int>(sites.size());
  const SiteGrid grid(sites);
  std::vector<Polygon> cells(n);
  for (int i = 0; i < n; ++i) {
    const Point& s = sites[i];
    Polygon poly = unit_square();
    const int bx = grid.bucket(s.x()), by = grid.bucket(s.y());
    for (int ring = 0; ring <= grid.size(); ++ring) {
      if (ring >= 2) {
        double rmax = 0.0;
        for (const auto& v : poly) rmax = std::max(rmax, (v - s).norm());
        // every site beyond this ring is farther than (ring - 1) bucket widths
        if ((ring - 1) * grid.width() > 2.0 * rmax) break;
      }
      for (int jy = by - ring; jy <= by + ring; ++jy) {
        for (int jx = bx - ring; jx <= bx + ring; ++jx) {
          if (std::max(std::abs(jx - bx), std::abs(jy - by)) != ring) continue;
          if (jx < 0 || jy < 0 || jx >= grid.size() || jy >= grid.size()) continue;
          for (int j : grid.at(jx, jy)) {
            if (j == i) continue;
            const Point d = sites[j] - s;
            const Point mid = 0.5 * (sites[j] + s);
            poly = clip_halfplane(poly, d, d.dot(mid));
          }
        }
      }
    }
    cells[i] = std::move(poly);
  }
  return cells;
}

std::vector<Point> separate_coincident(std::vector<Point> sites, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int n = static_cast<int>(sites.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if ((sites[i] - sites[j]).norm() < 1e-10) {
        const double a = (rng() >> 11) * 0x1.0p-53 * 6.283185307179586;
        sites[i] += 1e-9 * Point(std::cos(a), std::sin(a));
        sites[i] = sites[i].cwiseMax(0.0).cwiseMin(1.0);
      }
    }
  }
  return sites;
}

Point polygon_centroid(const Polygon& poly) { return polygon_geometry(poly).centroid; }

}  // namespace

PolyMesh mesh_from_polygons(const std::vector<std::vector<Point>>& polygons, double tol) {
  // merge coincident points through a hash grid with cell size >= tol
  const double cell = std::max(tol, 1e-14) * 4.0;
  auto key = [cell](long long ix, long long iy) { return (ix << 32) ^ (iy & 0xffffffffLL); };
  std::unordered_map<long long, std::vector<int>> hash;
  std::vector<Point> verts;
  std::vector<std::vector<int>> cells;
  cells.reserve(polygons.size());

  auto find_or_add = [&](const Point& p) {
    const long long ix = static_cast<long long>(std::floor(p.x() / cell));
    const long long iy = static_cast<long long>(std::floor(p.y() / cell));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = hash.find(key(ix + dx, iy + dy));
        if (it == hash.end()) continue;
        for (int v : it->second)
          if ((verts[v] - p).norm() <= tol) return v;
      }
    const int v = static_cast<int>(verts.size());
    verts.push_back(p);
    hash[key(ix, iy)].push_back(v);
    return v;
  };

  for (const auto& poly : polygons) {
    std::vector<int> cyc;
    for (const auto& p : poly) {
      const int v = find_or_add(p);
      if (!cyc.empty() && cyc.back() == v) continue;
      cyc.push_back(v);
    }
    while (cyc.size() > 1 && cyc.front() == cyc.back()) cyc.pop_back();
    if (cyc.size() >= 3) cells.push_back(std::move(cyc));
  }

  // insert vertices lying in the interior of other cells' edges
  Eigen::AlignedBox2d box;
  for (const auto& p : verts) box.extend(p);
  const int gb = std::max(1, static_cast<int>(std::sqrt(verts.size() / 4.0)));
  const Point lo = box.min();
  const Point span = (box.max() - box.min()).cwiseMax(1e-300);
  auto bidx = [&](double t, int dim) {
    return std::clamp(static_cast<int>((t - lo[dim]) / span[dim] * gb), 0, gb - 1);
  };
  std::vector<std::vector<int>> buckets(gb * gb);
  for (int v = 0; v < static_cast<int>(verts.size()); ++v)
    buckets[bidx(verts[v].y(), 1) * gb + bidx(verts[v].x(), 0)].push_back(v);

  for (auto& cyc : cells) {
    std::vector<int> out;
    const int m = static_cast<int>(cyc.size());
    for (int i = 0; i < m; ++i) {
      const int a = cyc[i], b = cyc[(i + 1) % m];
      out.push_back(a);
      const Point pa = verts[a], pb = verts[b];
      const Point d = pb - pa;
      const double len2 = d.squaredNorm();
      std::vector<std::pair<double, int>> hits;
      const int x0 = bidx(std::min(pa.x(), pb.x()) - tol, 0), x1 = bidx(std::max(pa.x(), pb.x()) + tol, 0);
      const int y0 = bidx(std::min(pa.y(), pb.y()) - tol, 1), y1 = bidx(std::max(pa.y(), pb.y()) + tol, 1);
      for (int by = y0; by <= y1; ++by)
        for (int bx = x0; bx <= x1; ++bx)
          for (int v : buckets[by * gb + bx]) {
            if (v == a || v == b) continue;
            const double t = (verts[v] - pa).dot(d) / len2;
            if (t <= 0.0 || t >= 1.0) continue;
            const double dist = (pa + t * d - verts[v]).norm();
            if (dist <= tol) hits.emplace_back(t, v);
          }
      std::sort(hits.begin(), hits.end());
      for (const auto& h : hits) out.push_back(h.second);
    }
    cyc = std::move(out);
  }
  return PolyMesh(std::move(verts), std::move(cells));
}

std::vector<Point> random_sites(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> sites(n);
  for (auto& s : sites) {
    const double x = (rng() >> 11) * 0x1.0p-53;
    const double y = (rng() >> 11) * 0x1.0p-53;
    s = Point(x, y);
  }
  return sites;
}

std::vector<Point> lloyd_step(const std::vector<Point>& sites) {
  const auto cells = voronoi_cells(sites);
  std::vector<Point> next(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i)
    next[i] = polygon_centroid(cells[i]).cwiseMax(0.0).cwiseMin(1.0);
  return next;
}

double cvt_energy(const std::vector<Point>& sites) {
  const auto cells = voronoi_cells(sites);
  double e = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto geom = polygon_geometry(cells[i]);
    const auto rule = polygon_rule(geom, 2);
    for (int q = 0; q < rule.size(); ++q) e += rule.weights[q] * (rule.points[q] - sites[i]).squaredNorm();
  }
  return e;
}

PolyMesh voronoi_mesh(std::vector<Point> sites, std::uint64_t seed) {
  sites = separate_coincident(std::move(sites), seed);
  return mesh_from_polygons(voronoi_cells(sites));
}

PolyMesh gen_voronoi(int n, std::uint64_t seed, int lloyd_iters) {
  if (n < 2) throw std::invalid_argument("gen_voronoi: n must be >= 2");
  if (lloyd_iters < 0) throw std::invalid_argument("gen_voronoi: lloyd_iters must be >= 0");
  auto sites = separate_coincident(random_sites(n, seed), seed);
  for (int it = 0; it < lloyd_iters; ++it) sites = separate_coincident(lloyd_step(sites), seed + it + 1);
  return voronoi_mesh(std::move(sites), seed);
}

PolyMesh gen_hexagon(int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("gen_hexagon: nx, ny must be >= 2");
  std::vector<Point> sites;
  sites.reserve(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) sites.emplace_back((i + 0.25 + 0.5 * (j % 2)) / nx, (j + 0.5) / ny);
  return mesh_from_polygons(voronoi_cells(sites));
}

PolyMesh gen_glued(int left_ny, int right_ny) {
  if (left_ny < 1 || right_ny < 1) throw std::invalid_argument("gen_glued: row counts must be positive");
  if (left_ny == right_ny) throw std::invalid_argument("gen_glued: left_ny must differ from right_ny");
  std::vector<Polygon> polys;
  auto add_grid = [&polys](double x0, int ny) {
    const int nx = std::max(1, static_cast<int>(std::lround(ny / 2.0)));
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double xa = x0 + 0.5 * i / nx, xb = x0 + 0.5 * (i + 1) / nx;
        const double ya = double(j) / ny, yb = double(j + 1) / ny;
        polys.push_back({Point(xa, ya), Point(xb, ya), Point(xb, yb), Point(xa, yb)});
      }
  };
  add_grid(0.0, left_ny);
  add_grid(0.5, right_ny);
  return mesh_from_polygons(polys);
}

PolyMesh split_edge(const PolyMesh& mesh, int cell, int edge, double eps) {
  if (cell < 0 || cell >= mesh.num_cells()) throw std::out_of_range("split_edge: invalid cell index");
  const auto& cyc = mesh.cell(cell);
  const int m = static_cast<int>(cyc.size());
  if (edge < 0 || edge >= m) throw std::out_of_range("split_edge: invalid edge index");
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("split_edge: eps must lie in (0, 1/2]");

  const int a = cyc[edge], b = cyc[(edge + 1) % m];
  auto verts = mesh.vertices();
  const int p = static_cast<int>(verts.size());
  verts.push_back(verts[a] + eps * (verts[b] - verts[a]));

  auto cells = mesh.cells();
  const Edge& e = mesh.edges()[mesh.cell_edge(cell, edge)];
  for (int c : e.cells) {
    if (c < 0) continue;
    auto& cy = cells[c];
    const int mc = static_cast<int>(cy.size());
    for (int i = 0; i < mc; ++i) {
      const int u = cy[i], w = cy[(i + 1) % mc];
      if ((u == a && w == b) || (u == b && w == a)) {
        cy.insert(cy.begin() + i + 1, p);
        break;
      }
    }
  }
  return PolyMesh(std::move(verts), std::move(cells));
}

}  // namespace vemlab
