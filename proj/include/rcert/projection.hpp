#pragma once

#include <cmath>
#include <vector>

#include "rcert/vecmat.hpp"

namespace rcert {

// Half-space a . x <= b with a of unit-free norm (not required normalized).
struct HalfSpace {
  Vec a;
  double b = 0.0;
};

struct ProjectionResult {
  bool feasible = false;
  Vec point;
  double dist = 0.0;
};

// Euclidean projection of a point onto an intersection of half-spaces via
// Dykstra's alternating projections. Problems here are tiny (few constraints,
// low dimension), so a generous sweep cap is cheap. Infeasibility is flagged
// when the iterate still violates a constraint after the cap.
inline ProjectionResult project_halfspaces(const Vec& point,
                                           const std::vector<HalfSpace>& hs,
                                           std::size_t max_sweeps = 2000,
                                           double tol = 1e-10) {
  const std::size_t n = point.size();
  Vec x = point;
  std::vector<Vec> corrections(hs.size(), Vec(n, 0.0));
  std::vector<double> nrm2(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    double s = 0.0;
    for (double v : hs[i].a) s += v * v;
    nrm2[i] = s;
  }
  double worst = 0.0;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double shift = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (nrm2[i] == 0.0) continue;
      // y = x + correction, then project y onto half-space i
      Vec y(n);
      for (std::size_t j = 0; j < n; ++j) y[j] = x[j] + corrections[i][j];
      double viol = dot(hs[i].a, y) - hs[i].b;
      Vec z = y;
      if (viol > 0.0) {
        double scale = viol / nrm2[i];
        for (std::size_t j = 0; j < n; ++j) z[j] -= scale * hs[i].a[j];
      }
      for (std::size_t j = 0; j < n; ++j) {
        corrections[i][j] = y[j] - z[j];
        double d = z[j] - x[j];
        shift += d * d;
        x[j] = z[j];
      }
    }
    worst = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (nrm2[i] == 0.0) continue;
      worst = std::max(worst, (dot(hs[i].a, x) - hs[i].b) / std::sqrt(nrm2[i]));
    }
    if (worst <= tol && shift <= tol * tol) break;
  }
  ProjectionResult r;
  r.feasible = worst <= 1e-7;
  r.point = std::move(x);
  r.dist = r.feasible ? dist2(r.point, point) : 0.0;
  return r;
}

}  // namespace rcert
