#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rcert/certificate.hpp"
#include "rcert/errors.hpp"
#include "rcert/vecmat.hpp"
#include "rcert/wasserstein.hpp"

namespace rcert {

struct RiskSpec {
  double alpha = 1.0;    // risk level in (0,1]
  double beta = 0.05;    // confidence error in (0,1)
  double half_width = 0.1;  // target certified half-width H > 0
  double lipschitz = 1.0;   // L0 of the performance function, >= 0
  double rho = 0.0;         // support diameter bound for the h-values
  std::size_t dim = 1;      // dimension used in the concentration radius

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw OutOfRange("risk spec: alpha must lie in (0,1]");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw OutOfRange("risk spec: beta must lie in (0,1)");
    }
    if (!(half_width > 0.0)) throw OutOfRange("risk spec: H must be > 0");
    if (lipschitz < 0.0) throw OutOfRange("risk spec: L0 must be >= 0");
    if (rho < 0.0) throw OutOfRange("risk spec: rho must be >= 0");
  }
};

// VaR_alpha = inf{ v : F(v) >= 1 - alpha } on the empirical CDF.
inline double var_alpha(const Vec& samples, double alpha) {
  if (samples.empty()) throw OutOfRange("var_alpha: need N >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw OutOfRange("var_alpha: alpha must lie in (0,1]");
  }
  Vec x = samples;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  // smallest index i with (i+1)/N >= 1-alpha
  double target = (1.0 - alpha) * n;
  std::size_t idx = 0;
  if (target > 1.0) {
    idx = static_cast<std::size_t>(std::ceil(target - 1e-12)) - 1;
    idx = std::min(idx, x.size() - 1);
  }
  return x[idx];
}

// Rockafellar-Uryasev value min_t [ t + mean((x - t)^+) / alpha ]; the
// objective is piecewise-linear convex with breakpoints at the samples, so a
// scan over sorted sample values is exact. Equals the mean at alpha = 1.
inline double cvar_alpha(const Vec& samples, double alpha) {
  if (samples.empty()) throw OutOfRange("cvar_alpha: need N >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw OutOfRange("cvar_alpha: alpha must lie in (0,1]");
  }
  Vec x = samples;
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  // suffix sums: for t = x[i], (x-t)^+ sums over j > i
  double best = x.back();  // t = max sample
  double suffix = 0.0;
  std::size_t cnt = 0;
  const double invn = 1.0 / static_cast<double>(n);
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) {
      suffix += x[i + 1];
      ++cnt;
    }
    double t = x[i];
    double val = t + (suffix - static_cast<double>(cnt) * t) * invn / alpha;
    best = std::min(best, val);
  }
  return best;
}

// Certified interval |CVaR_emp - CVaR_true| <= (L0/alpha) * eps2(beta).
inline Certificate cvar_certified_interval(const Vec& h_samples,
                                           const RiskSpec& spec) {
  spec.validate();
  double emp = cvar_alpha(h_samples, spec.alpha);
  RadiusParams rp{h_samples.size(), spec.dim, spec.beta, spec.rho};
  W1RadiusResult r = w1_radius_full(rp);
  double half = (spec.lipschitz / spec.alpha) * r.value;
  Certificate c;
  c.kind = "cvar_interval";
  c.values["lower"] = emp - half;
  c.values["upper"] = emp + half;
  c.values["empirical_cvar"] = emp;
  c.values["half_width"] = half;
  c.confidence = 1.0 - spec.beta;
  c.guarantee["alpha"] = spec.alpha;
  c.guarantee["beta"] = spec.beta;
  c.guarantee["eps2"] = r.value;
  c.guarantee["L0"] = spec.lipschitz;
  c.guarantee["rho"] = spec.rho;
  c.guarantee["N"] = static_cast<double>(h_samples.size());
  if (r.dim_warning) {
    c.warnings.push_back(
        "dimension constant for n=2 substituted by its n=3 value");
  }
  return c;
}

// Smallest N with (L0/alpha) * eps2(N) <= H. The radius is strictly
// decreasing in N, so exponential search plus bisection is exact. A relative
// tie tolerance absorbs floating-point roundoff at exact-equality parameters.
inline std::size_t plan_cvar_samples(const RiskSpec& spec) {
  spec.validate();
  if (spec.lipschitz == 0.0 || spec.rho == 0.0) return 1;
  auto ok = [&](std::size_t n) {
    RadiusParams rp{n, spec.dim, spec.beta, spec.rho};
    double half = (spec.lipschitz / spec.alpha) * w1_radius(rp);
    return half <= spec.half_width * (1.0 + 1e-9);
  };
  if (ok(1)) return 1;
  std::size_t lo = 1, hi = 2;
  while (!ok(hi)) {
    lo = hi;
    if (hi > (std::size_t{1} << 62)) {
      throw OutOfRange("plan_cvar_samples: target half-width unreachable");
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Width between the certified upper and lower Perf bounds at half-width H.
inline double gamma_robustness(double half_width) {
  if (!(half_width > 0.0)) throw OutOfRange("gamma_robustness: H must be > 0");
  return 2.0 * half_width;
}

}  // namespace rcert
