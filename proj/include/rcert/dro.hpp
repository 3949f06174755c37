#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "rcert/certificate.hpp"
#include "rcert/errors.hpp"
#include "rcert/perf_functions.hpp"
#include "rcert/projection.hpp"
#include "rcert/sampling.hpp"
#include "rcert/support_set.hpp"
#include "rcert/vecmat.hpp"
#include "rcert/wasserstein.hpp"

namespace rcert {

// min_i (c_i . x + d_i); the concave objective the ambiguity-ball programs
// maximize. Affine objectives are the single-piece case.
struct MinOfAffine {
  std::vector<std::pair<Vec, double>> pieces;

  double eval(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [c, d] : pieces) best = std::min(best, dot(c, x) + d);
    return best;
  }

  double lipschitz() const {
    double best = 0.0;
    for (const auto& [c, d] : pieces) best = std::max(best, norm2(c));
    return best;
  }

  static MinOfAffine negation_of(const PiecewiseMaxAffine& p) {
    MinOfAffine g;
    for (const auto& [a, b] : p.pieces) {
      g.pieces.push_back({scaled(a, -1.0), -b});
    }
    return g;
  }
};

struct AmbiguityBall {
  EmpiricalDistribution center;
  double eps = 0.0;
  std::optional<FittedSupport> support;
};

struct DroSolution {
  double value = 0.0;
  Mat transported;       // N x n optimal points xi*_k
  double budget_spent = 0.0;  // (1/N) sum ||y_k - xi*_k||
  std::size_t iterations = 0;
  double gap_estimate = 0.0;  // value-grid resolution
};

struct DroOptions {
  std::size_t grid = 128;  // value-grid points per sample
};

namespace detail {

struct LevelSetProbe {
  const MinOfAffine* g;
  const FittedSupport* support;  // may be null
  Vec y;

  // distance from y to {x : g(x) >= u} intersected with the support
  std::optional<ProjectionResult> operator()(double u) const {
    std::vector<HalfSpace> hs;
    if (support) {
      for (std::size_t i = 0; i < support->tmpl.n_dirs(); ++i) {
        hs.push_back({support->tmpl.dirs.row_vec(i), support->theta[i]});
      }
    }
    for (const auto& [c, d] : g->pieces) {
      hs.push_back({scaled(c, -1.0), d - u});
    }
    ProjectionResult r = project_halfspaces(y, hs);
    if (!r.feasible) return std::nullopt;
    return r;
  }
};

}  // namespace detail

// Separable concave program
//   sup (1/N) sum_k g(xi_k)  s.t.  (1/N) sum_k ||xi_k - y_k|| <= eps,
//                                  xi_k in support (when present).
// Solved by decomposition: each sample's value function
//   phi_k(t) = sup{ g(xi) : ||xi - y_k|| <= t, xi in support }
// is concave in t; its inverse (distance to the u-superlevel set, one small
// projection per grid point) is tabulated on a refinable u-grid and the total
// budget N*eps is spread across samples by greedy slope order, which is
// optimal for concave per-sample gains.
inline DroSolution dro_sup_concave(const MinOfAffine& g,
                                   const AmbiguityBall& ball,
                                   const DroOptions& opts = {}) {
  if (g.pieces.empty()) throw NotConcave("objective has no pieces");
  if (ball.eps < 0.0) throw OutOfRange("ambiguity radius must be >= 0");
  const std::size_t n_samples = ball.center.count();
  const std::size_t dim = ball.center.dim();
  if (n_samples < 1) throw OutOfRange("ambiguity ball needs N >= 1");

  const FittedSupport* support =
      ball.support.has_value() ? &*ball.support : nullptr;
  for (std::size_t k = 0; k < n_samples; ++k) {
    if (support && !contains(*support, ball.center.points.row(k))) {
      throw InfeasibleSupport("center point outside the support polytope");
    }
  }

  DroSolution sol;
  sol.transported = ball.center.points;
  const double invn = 1.0 / static_cast<double>(n_samples);

  if (ball.eps == 0.0) {
    double v = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      v += g.eval(ball.center.points.row(k));
    }
    sol.value = v * invn;
    return sol;
  }

  // affine objective, no support: exact closed form
  if (g.pieces.size() == 1 && !support) {
    const auto& [c, d] = g.pieces.front();
    double cn = norm2(c);
    double mean = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      mean += dot(c, ball.center.points.row(k));
    }
    mean = mean * invn + d;
    sol.value = mean + ball.eps * cn;
    if (cn > 0.0) {
      Vec dir = scaled(c, ball.eps / cn);
      for (std::size_t k = 0; k < n_samples; ++k) {
        auto row = sol.transported.row(k);
        for (std::size_t j = 0; j < dim; ++j) row[j] += dir[j];
      }
      sol.budget_spent = ball.eps;
    }
    return sol;
  }

  const double budget = static_cast<double>(n_samples) * ball.eps;
  const double lip = g.lipschitz();
  double reach_cap = budget;
  if (support) {
    try {
      reach_cap = std::min(reach_cap, diameter_bound(*support));
    } catch (const UnboundedPolytope&) {
      // keep the budget cap
    }
  }

  struct SampleTable {
    double u0 = 0.0;
    std::vector<double> u;    // grid levels (excluding u0)
    std::vector<double> psi;  // matching distances
  };
  std::vector<SampleTable> tables(n_samples);
  const std::size_t grid = std::max<std::size_t>(opts.grid, 4);

  for (std::size_t k = 0; k < n_samples; ++k) {
    detail::LevelSetProbe probe{&g, support, ball.center.points.row_vec(k)};
    SampleTable& tab = tables[k];
    tab.u0 = g.eval(ball.center.points.row(k));
    double cap = tab.u0 + lip * reach_cap;
    if (cap <= tab.u0) continue;

    auto reachable = [&](double u) -> std::optional<double> {
      auto r = probe(u);
      if (!r || r->dist > budget + 1e-9) return std::nullopt;
      return r->dist;
    };

    // largest attainable level within the total budget
    double lo = tab.u0, hi = cap;
    if (reachable(cap)) {
      lo = cap;
    } else {
      for (int it = 0; it < 60 && hi - lo > 1e-13 * (1.0 + std::abs(hi));
           ++it) {
        double mid = 0.5 * (lo + hi);
        if (reachable(mid)) lo = mid; else hi = mid;
      }
    }
    double u_max = lo;
    if (u_max - tab.u0 < 1e-14 * (1.0 + std::abs(tab.u0))) continue;

    double du = (u_max - tab.u0) / static_cast<double>(grid);
    double prev_psi = 0.0;
    for (std::size_t j = 1; j <= grid; ++j) {
      double u = tab.u0 + du * static_cast<double>(j);
      auto r = probe(u);
      double psi = r ? std::max(r->dist, prev_psi) : budget + 1.0;
      tab.u.push_back(u);
      tab.psi.push_back(psi);
      prev_psi = psi;
      ++sol.iterations;
    }
    sol.gap_estimate = std::max(sol.gap_estimate, du);
  }

  // greedy concave water-filling over the per-sample segment slopes
  struct Head {
    double slope;
    std::size_t k;
    std::size_t j;  // next segment index in tables[k]
  };
  auto cmp = [](const Head& a, const Head& b) { return a.slope < b.slope; };
  std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);

  auto segment = [&](std::size_t k, std::size_t j) -> std::optional<Head> {
    const SampleTable& tab = tables[k];
    if (j >= tab.u.size()) return std::nullopt;
    double u_prev = (j == 0) ? tab.u0 : tab.u[j - 1];
    double t_prev = (j == 0) ? 0.0 : tab.psi[j - 1];
    double dt = tab.psi[j] - t_prev;
    double du = tab.u[j] - u_prev;
    if (tab.psi[j] > budget + 0.5) return std::nullopt;  // unreachable level
    double slope = dt <= 1e-15 ? std::numeric_limits<double>::infinity()
                               : du / dt;
    return Head{slope, k, j};
  };

  for (std::size_t k = 0; k < n_samples; ++k) {
    if (auto h = segment(k, 0)) heap.push(*h);
  }

  std::vector<double> level(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) level[k] = tables[k].u0;
  double remaining = budget;
  while (!heap.empty() && remaining > 1e-15) {
    Head h = heap.top();
    heap.pop();
    const SampleTable& tab = tables[h.k];
    double u_prev = (h.j == 0) ? tab.u0 : tab.u[h.j - 1];
    double t_prev = (h.j == 0) ? 0.0 : tab.psi[h.j - 1];
    double dt = tab.psi[h.j] - t_prev;
    double du = tab.u[h.j] - u_prev;
    if (dt <= remaining + 1e-15) {
      level[h.k] = tab.u[h.j];
      remaining -= std::max(dt, 0.0);
      if (auto nxt = segment(h.k, h.j + 1)) heap.push(*nxt);
    } else {
      double f = remaining / dt;
      level[h.k] = u_prev + f * du;
      remaining = 0.0;
    }
  }

  // realize transported points at the achieved levels
  double value = 0.0;
  double spent = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    Vec y = ball.center.points.row_vec(k);
    Vec xi = y;
    if (level[k] > tables[k].u0 + 1e-15 * (1.0 + std::abs(tables[k].u0))) {
      detail::LevelSetProbe probe{&g, support, y};
      auto r = probe(level[k]);
      if (r) xi = r->point;
    }
    value += g.eval(xi);
    spent += dist2(xi, y);
    auto row = sol.transported.row(k);
    for (std::size_t j = 0; j < dim; ++j) row[j] = xi[j];
  }
  sol.value = value * invn;
  sol.budget_spent = spent * invn;
  return sol;
}

inline DroSolution dro_sup_concave(const PerfFn& h, const AmbiguityBall& ball,
                                   const DroOptions& opts = {}) {
  if (!h.is_concave()) {
    throw NotConcave("dro_sup_concave requires a concave performance function");
  }
  MinOfAffine g;
  g.pieces = as_piecewise(h).pieces;  // concave variants are single-piece
  return dro_sup_concave(g, ball, opts);
}

// inf over the ball of a convex h, via sup of -h.
inline DroSolution dro_inf_convex(const PerfFn& h, const AmbiguityBall& ball,
                                  const DroOptions& opts = {}) {
  if (!h.is_convex()) {
    throw UnsupportedStructure("dro_inf_convex requires a convex function");
  }
  MinOfAffine neg = MinOfAffine::negation_of(as_piecewise(h));
  DroSolution sol = dro_sup_concave(neg, ball, opts);
  sol.value = -sol.value;
  return sol;
}

// zeta = 2 h_max eps1 + L eps2 + L eps3
inline double zeta(double h_max, double lip, double eps1, double eps2,
                   double eps3) {
  if (h_max < 0 || lip < 0 || eps1 < 0 || eps2 < 0 || eps3 < 0) {
    throw OutOfRange("zeta: all arguments must be >= 0");
  }
  return 2.0 * h_max * eps1 + lip * eps2 + lip * eps3;
}

// Exhaustive verification oracle: per-sample displacement grids with a shared
// integer budget (in grid_step units of Euclidean displacement), combined by
// dynamic programming. Returns the best objective found; a lower bound on the
// true supremum that converges as grid_step -> 0.
inline double dro_brute_force(const std::function<double(const Vec&)>& f,
                              const AmbiguityBall& ball, double grid_step) {
  const std::size_t n_samples = ball.center.count();
  const std::size_t dim = ball.center.dim();
  if (n_samples > 5 || dim > 2) {
    throw TooLarge("dro_brute_force: oracle is limited to N <= 5, n <= 2");
  }
  if (grid_step <= 0.0) throw OutOfRange("grid_step must be > 0");
  const FittedSupport* support =
      ball.support.has_value() ? &*ball.support : nullptr;

  const long budget_units = static_cast<long>(
      std::floor(static_cast<double>(n_samples) * ball.eps / grid_step + 1e-9));
  const double neg_inf = -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> best(
      n_samples, std::vector<double>(budget_units + 1, neg_inf));
  for (std::size_t k = 0; k < n_samples; ++k) {
    Vec y = ball.center.points.row_vec(k);
    auto consider = [&](const Vec& xi, long units) {
      if (units > budget_units) return;
      if (support && !contains(*support, xi)) return;
      best[k][units] = std::max(best[k][units], f(xi));
    };
    if (dim == 1) {
      for (long i = -budget_units; i <= budget_units; ++i) {
        long units = std::labs(i);
        consider({y[0] + grid_step * static_cast<double>(i)}, units);
      }
    } else {
      for (long i = -budget_units; i <= budget_units; ++i) {
        for (long j = -budget_units; j <= budget_units; ++j) {
          double r = std::sqrt(static_cast<double>(i * i + j * j));
          long units = static_cast<long>(std::ceil(r - 1e-9));
          if (units > budget_units) continue;
          consider({y[0] + grid_step * static_cast<double>(i),
                    y[1] + grid_step * static_cast<double>(j)},
                   units);
        }
      }
    }
    for (long t = 1; t <= budget_units; ++t) {
      best[k][t] = std::max(best[k][t], best[k][t - 1]);
    }
  }

  std::vector<double> dp(budget_units + 1, 0.0);
  bool first = true;
  for (std::size_t k = 0; k < n_samples; ++k) {
    std::vector<double> next(budget_units + 1, neg_inf);
    if (first) {
      next = best[k];
      first = false;
    } else {
      for (long t = 0; t <= budget_units; ++t) {
        for (long s = 0; s <= t; ++s) {
          if (dp[t - s] == neg_inf || best[k][s] == neg_inf) continue;
          next[t] = std::max(next[t], dp[t - s] + best[k][s]);
        }
      }
    }
    dp = std::move(next);
  }
  double out = neg_inf;
  for (double v : dp) out = std::max(out, v);
  return out / static_cast<double>(n_samples);
}

inline double dro_brute_force(const PerfFn& h, const AmbiguityBall& ball,
                              double grid_step) {
  return dro_brute_force([&h](const Vec& x) { return eval_h(h, x); }, ball,
                         grid_step);
}

struct PerfBoundOptions {
  std::optional<double> eps1_override;
  std::optional<double> eps2_override;
  std::optional<double> eps3_override;
  bool max_beta_confidence_compat = false;  // report 1-max{beta1,beta2} instead
  DroOptions dro;
};

struct PerfBounds {
  std::optional<Certificate> upper;
  std::optional<Certificate> lower;
};

namespace detail {

inline double sample_cloud_diameter(const Mat& points) {
  if (points.rows == 0) return 0.0;
  Vec lo(points.cols, std::numeric_limits<double>::infinity());
  Vec hi(points.cols, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < points.rows; ++k) {
    auto r = points.row(k);
    for (std::size_t j = 0; j < points.cols; ++j) {
      lo[j] = std::min(lo[j], r[j]);
      hi[j] = std::max(hi[j], r[j]);
    }
  }
  double s = 0.0;
  for (std::size_t j = 0; j < points.cols; ++j) {
    double w = hi[j] - lo[j];
    s += w * w;
  }
  return std::sqrt(s);
}

inline double support_origin_radius(const FittedSupport& fs) {
  auto [lo, hi] = polytope_bbox(fs);
  double s = 0.0;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    double m = std::max(std::abs(lo[j]), std::abs(hi[j]));
    s += m * m;
  }
  return std::sqrt(s);
}

}  // namespace detail

// End-to-end Perf bounds over the support-constrained ambiguity ball.
// Concave h gets the DRO upper bound plus zeta; convex h gets the DRO lower
// bound minus zeta (the conservative sign; see certificate warnings). The
// combined confidence is the union bound 1 - (beta1 + beta2).
inline PerfBounds certify_perf_bounds(const PerfFn& h,
                                      const OutputSamples& samples,
                                      const FittedSupport& fs, double beta2,
                                      const PerfBoundOptions& opts = {}) {
  if (!h.is_convex() && !h.is_concave()) {
    throw UnsupportedStructure("h must be convex or concave");
  }
  if (!(beta2 > 0.0 && beta2 < 1.0)) {
    throw OutOfRange("certify_perf_bounds: beta2 must lie in (0,1)");
  }
  const std::size_t n_samples = samples.count();
  const std::size_t dim = samples.dim();

  double eps1 = opts.eps1_override.value_or(fs.eps1);
  W1RadiusResult r2{0.0, false}, r3{0.0, false};
  double eps2, eps3;
  if (opts.eps2_override) {
    eps2 = *opts.eps2_override;
  } else {
    r2 = w1_radius_full(
        {n_samples, dim, beta2, detail::sample_cloud_diameter(samples.points)});
    eps2 = r2.value;
  }
  if (opts.eps3_override) {
    eps3 = *opts.eps3_override;
  } else {
    r3 = w1_radius_full({n_samples, dim, beta2, diameter_bound(fs)});
    eps3 = r3.value;
  }

  const double lip = lipschitz_const(h);
  const double h_max = h_max_bound(h, detail::support_origin_radius(fs));
  const double z = zeta(h_max, lip, eps1, eps2, eps3);
  const double confidence = opts.max_beta_confidence_compat
                                ? 1.0 - std::max(fs.beta1, beta2)
                                : 1.0 - (fs.beta1 + beta2);

  AmbiguityBall ball;
  ball.center.points = samples.points;
  ball.eps = eps3;
  ball.support = fs;

  auto base_cert = [&](const char* kind) {
    Certificate c;
    c.kind = kind;
    c.confidence = confidence;
    c.guarantee["eps1"] = eps1;
    c.guarantee["eps2"] = eps2;
    c.guarantee["eps3"] = eps3;
    c.guarantee["beta1"] = fs.beta1;
    c.guarantee["beta2"] = beta2;
    c.guarantee["zeta"] = z;
    c.guarantee["h_max"] = h_max;
    c.guarantee["L"] = lip;
    c.guarantee["N"] = static_cast<double>(n_samples);
    if (!fs.sufficient_samples) {
      c.warnings.push_back("insufficient samples for the scenario guarantee");
    }
    if (r2.dim_warning || r3.dim_warning) {
      c.warnings.push_back(
          "dimension constant for n=2 substituted by its n=3 value");
    }
    c.warnings.push_back(
        "eps3 convention: concentration radius with the fitted-support "
        "diameter");
    if (opts.max_beta_confidence_compat) {
      c.warnings.push_back("confidence uses max{beta1,beta2} compatibility mode");
    }
    return c;
  };

  PerfBounds out;
  if (h.is_concave()) {
    DroSolution sup = dro_sup_concave(h, ball, opts.dro);
    Certificate c = base_cert("perf_upper");
    c.values["bound"] = sup.value + z;
    c.values["dro_value"] = sup.value;
    out.upper = std::move(c);
  }
  if (h.is_convex()) {
    DroSolution inf = dro_inf_convex(h, ball, opts.dro);
    Certificate c = base_cert("perf_lower");
    c.values["bound"] = inf.value - z;
    c.values["dro_value"] = inf.value;
    c.warnings.push_back(
        "lower bound applies -zeta (triangle-inequality direction)");
    out.lower = std::move(c);
  }
  return out;
}

}  // namespace rcert
