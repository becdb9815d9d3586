#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mgems/common.hpp"

// Secant piecewise-linear over-approximation of convex quadratics on equal
// width segments. Used for generator fuel curves and the squared-rate terms of
// the storage aging model; convexity makes the interpolant an epigraph of its
// segment lines, so each curve lowers into a MILP as one row per segment.

namespace mgems {

struct PwlPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PwlCurve {
  std::vector<PwlPoint> pts;   // K+1 breakpoints, ascending x
  double max_abs_error = 0.0;  // certified max over-approximation gap

  int segments() const { return static_cast<int>(pts.size()) - 1; }
  double lo() const { return pts.front().x; }
  double hi() const { return pts.back().x; }
  double slope(int k) const {
    return (pts[k + 1].y - pts[k].y) / (pts[k + 1].x - pts[k].x);
  }
  double intercept(int k) const { return pts[k].y - slope(k) * pts[k].x; }
};

// Chords of f(x) = a x^2 + b x over [lo, hi] on K equal segments. The chord of
// a convex function lies above it; the gap on one segment of width d peaks at
// the midpoint with value a d^2 / 4.
inline PwlCurve approximate_quadratic(double a, double b, double lo, double hi,
                                      int segments) {
  if (!(hi > lo)) throw std::invalid_argument("pwl: empty domain");
  if (segments < 1) throw std::invalid_argument("pwl: need at least one segment");
  if (a < 0.0) throw std::invalid_argument("pwl: quadratic must be convex");
  PwlCurve c;
  double width = (hi - lo) / segments;
  c.pts.reserve(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    double x = (k == segments) ? hi : lo + width * k;
    c.pts.push_back({x, a * x * x + b * x});
  }
  c.max_abs_error = a * width * width / 4.0;
  return c;
}

inline double pwl_evaluate(const PwlCurve& c, double x) {
  double span = c.hi() - c.lo();
  double tol = 1e-9 * (1.0 + std::fabs(span));
  if (x < c.lo() - tol || x > c.hi() + tol)
    throw std::invalid_argument("pwl: evaluation outside domain");
  x = std::min(std::max(x, c.lo()), c.hi());
  int lo = 0, hi = c.segments();
  while (lo + 1 < hi) {
    int mid = (lo + hi) / 2;
    if (c.pts[mid].x <= x)
      lo = mid;
    else
      hi = mid;
  }
  return c.slope(lo) * x + c.intercept(lo);
}

struct EpigraphRow {
  double x_coef = 0.0;  // slope on the argument variable
  double rhs = 0.0;     // z >= x_coef * x + (-rhs)  <=>  x_coef*x - z <= rhs
};

// Rows enforcing z >= chord_k(x) for every segment; valid only because slopes
// are nondecreasing (checked), which makes the interpolant equal the max of
// its chords over the whole domain.
inline std::vector<EpigraphRow> pwl_epigraph_rows(const PwlCurve& c) {
  std::vector<EpigraphRow> rows;
  rows.reserve(c.segments());
  double prev = -kInf;
  for (int k = 0; k < c.segments(); ++k) {
    double s = c.slope(k);
    if (s < prev - 1e-9 * (1.0 + std::fabs(s)))
      throw std::invalid_argument("pwl: non-convex breakpoints");
    prev = s;
    rows.push_back({s, -c.intercept(k)});
  }
  return rows;
}

}  // namespace mgems
