#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rcert/errors.hpp"
#include "rcert/sampling.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

struct RadiusParams {
  std::size_t n_samples = 1;
  std::size_t dim = 1;
  double beta = 0.05;
  double rho = 0.0;  // support diameter, same units as the outputs
};

namespace detail {

// Dimension constant C* = sqrt(n) 2^{(n-2)/2} (1/(1-2^{1-n/2}) + 2).
// The inner factor is negative for n=1 and singular for n=2; the fallback
// convention clamps the C* term at 0 for n=1 and substitutes the n=3 inner
// factor for n=2 (with a warning attached to certificates downstream).
inline double w1_dim_constant(std::size_t n, bool* warned = nullptr) {
  if (warned) *warned = false;
  double dn = static_cast<double>(n);
  if (n == 1) return 0.0;
  double inner;
  if (n == 2) {
    inner = 1.0 / (1.0 - std::pow(2.0, 1.0 - 3.0 / 2.0));  // n=3 value
    if (warned) *warned = true;
  } else {
    inner = 1.0 / (1.0 - std::pow(2.0, 1.0 - dn / 2.0));
  }
  return std::sqrt(dn) * std::pow(2.0, (dn - 2.0) / 2.0) * (inner + 2.0);
}

}  // namespace detail

struct W1RadiusResult {
  double value = 0.0;
  bool dim_warning = false;
};

// Concentration radius eps2 = rho * (C* N^{-1/n} + sqrt(n) (2 ln 1/beta)^{1/2} N^{-1/2}).
inline W1RadiusResult w1_radius_full(const RadiusParams& p) {
  if (p.n_samples < 1) throw OutOfRange("w1_radius: N must be >= 1");
  if (!(p.beta > 0.0 && p.beta < 1.0)) {
    throw OutOfRange("w1_radius: beta must lie in (0,1)");
  }
  if (p.rho < 0.0) throw OutOfRange("w1_radius: rho must be >= 0");
  if (p.dim < 1) throw OutOfRange("w1_radius: dim must be >= 1");
  bool warned = false;
  double cstar = detail::w1_dim_constant(p.dim, &warned);
  double dn = static_cast<double>(p.dim);
  double N = static_cast<double>(p.n_samples);
  double value =
      p.rho * (cstar * std::pow(N, -1.0 / dn) +
               std::sqrt(dn) * std::sqrt(2.0 * std::log(1.0 / p.beta)) /
                   std::sqrt(N));
  return {value, warned};
}

inline double w1_radius(const RadiusParams& p) { return w1_radius_full(p).value; }

// Exact W1 between 1-D empiricals via quantile-function integration; for
// equal counts this reduces to the mean absolute difference of sorted samples.
inline double w1_exact_1d(const EmpiricalDistribution& a,
                          const EmpiricalDistribution& b) {
  if (a.dim() != 1 || b.dim() != 1) {
    throw DimensionMismatch("w1_exact_1d: both distributions must be 1-D");
  }
  Vec xa = a.points.data;
  Vec xb = b.points.data;
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const std::size_t na = xa.size();
  const std::size_t nb = xb.size();
  double total = 0.0;
  double q = 0.0;  // current quantile level
  std::size_t ia = 0, ib = 0;
  while (ia < na && ib < nb) {
    double qa = static_cast<double>(ia + 1) / static_cast<double>(na);
    double qb = static_cast<double>(ib + 1) / static_cast<double>(nb);
    double q_next = std::min(qa, qb);
    total += (q_next - q) * std::abs(xa[ia] - xb[ib]);
    q = q_next;
    if (qa <= q_next + 1e-15) ++ia;
    if (qb <= q_next + 1e-15) ++ib;
  }
  return total;
}

namespace detail {

// Hungarian algorithm (shortest augmenting paths with potentials), O(N^3).
inline double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

}  // namespace detail

// Exact optimal transport between equal-weight empiricals of equal size via
// min-cost perfect matching under Euclidean cost. Oracle-scale only.
inline double w1_exact_matching(const EmpiricalDistribution& a,
                                const EmpiricalDistribution& b) {
  if (a.count() != b.count()) {
    throw SizeMismatch("w1_exact_matching: sample counts differ");
  }
  if (a.count() > 64) {
    throw TooLarge("w1_exact_matching: oracle is limited to N <= 64");
  }
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("w1_exact_matching: dimensions differ");
  }
  const std::size_t n = a.count();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i][j] = dist2(a.points.row(i), b.points.row(j));
    }
  }
  return detail::min_cost_assignment(cost) / static_cast<double>(n);
}

}  // namespace rcert
