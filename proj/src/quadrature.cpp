#include "vemlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>

namespace vemlab {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

QuadRule1D compute_gauss_legendre(int n) {
  QuadRule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < kNewtonTol) break;
    }
    legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

QuadRule1D compute_gauss_lobatto(int n) {
  const int N = n - 1;  // interior nodes are the roots of P'_N
  QuadRule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  r.nodes.front() = -1.0;
  r.nodes.back() = 1.0;
  const double wend = 2.0 / (N * (N + 1.0));
  r.weights.front() = wend;
  r.weights.back() = wend;
  for (int i = 1; i < (n + 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / N);
    double p = 0, dp = 0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      legendre(N, x, p, dp);
      const double d2p = (2.0 * x * dp - N * (N + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < kNewtonTol) break;
    }
    legendre(N, x, p, dp);
    const double w = 2.0 / (N * (N + 1.0) * p * p);
    r.nodes[i] = x;
    r.nodes[n - 1 - i] = -x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    double p, dp;
    legendre(N, 0.0, p, dp);
    r.nodes[n / 2] = 0.0;
    r.weights[n / 2] = 2.0 / (N * (N + 1.0) * p * p);
  }
  return r;
}

// Rules are immutable once built; the table only grows.
class RuleCache {
public:
  template <class Make>
  const QuadRule1D& get(int n, Make make) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = rules_.find(n); it != rules_.end()) return *it->second;
    }
    auto rule = std::make_unique<QuadRule1D>(make(n));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = rules_.try_emplace(n, std::move(rule));
    return *it->second;
  }

private:
  std::shared_mutex mutex_;
  std::map<int, std::unique_ptr<QuadRule1D>> rules_;
};

}  // namespace

void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  if (std::abs(x) == 1.0) {
    dp = 0.5 * n * (n + 1.0) * std::pow(x, n - 1);
  } else {
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  }
}

const QuadRule1D& gauss_legendre(int n) {
  if (n < 1 || n > 32) throw std::invalid_argument("gauss_legendre: n must be in [1, 32], got " + std::to_string(n));
  static RuleCache cache;
  return cache.get(n, compute_gauss_legendre);
}

const QuadRule1D& gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be >= 2, got " + std::to_string(n));
  static RuleCache cache;
  return cache.get(n, compute_gauss_lobatto);
}

QuadRule2D polygon_rule(const ElementGeometry& geom, std::span<const Point> polygon, int degree) {
  if (degree < 0) throw std::invalid_argument("polygon_rule: negative degree");
  const int n1 = (degree + 3) / 2;
  const auto& g = gauss_legendre(n1);
  const int m = static_cast<int>(polygon.size());
  const Point& c = geom.centroid;

  QuadRule2D rule;
  rule.points.reserve(static_cast<std::size_t>(m) * n1 * n1);
  rule.weights.reserve(rule.points.capacity());
  for (int i = 0; i < m; ++i) {
    const Point e1 = polygon[i] - c;
    const Point e2 = polygon[(i + 1) % m] - c;
    const double area2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (!(area2 > 0.0))
      throw MeshError("polygon_rule: fan triangle " + std::to_string(i) +
                      " has non-positive area; the cell is not star-shaped with respect to its centroid");
    for (int a = 0; a < n1; ++a) {
      const double u = 0.5 * (g.nodes[a] + 1.0);
      const double wu = 0.5 * g.weights[a];
      for (int b = 0; b < n1; ++b) {
        const double v = 0.5 * (g.nodes[b] + 1.0);
        const double wv = 0.5 * g.weights[b];
        rule.points.push_back(c + u * ((1.0 - v) * e1 + v * e2));
        rule.weights.push_back(area2 * u * wu * wv);
      }
    }
  }
  return rule;
}

QuadRule2D polygon_rule(const ElementGeometry& geom, int degree) {
  return polygon_rule(geom, std::span<const Point>(geom.vertices), degree);
}

}  // namespace vemlab
