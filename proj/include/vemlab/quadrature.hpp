#pragma once

#include <span>
#include <vector>

#include "vemlab/mesh.hpp"

namespace vemlab {

/// Rule on the reference interval [-1, 1].
struct QuadRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

struct QuadRule2D {
  std::vector<Point> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule, exact up to degree 2n-1. Requires 1 <= n <= 32.
const QuadRule1D& gauss_legendre(int n);

/// n-point Gauss-Lobatto rule (endpoints included), exact up to degree 2n-3. Requires n >= 2.
const QuadRule1D& gauss_lobatto(int n);

/// Legendre polynomial P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp);

/// Fan triangulation of `polygon` from the geometry's centroid, each triangle
/// integrated with a collapsed (Duffy) Gauss product rule. Exact for bivariate
/// polynomials of total degree <= `degree`.
QuadRule2D polygon_rule(const ElementGeometry& geom, std::span<const Point> polygon, int degree);
QuadRule2D polygon_rule(const ElementGeometry& geom, int degree);

}  // namespace vemlab
