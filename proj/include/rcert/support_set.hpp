#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcert/errors.hpp"
#include "rcert/rng.hpp"
#include "rcert/sampling.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

enum class TemplateKind { box, octagon, circle_uniform, random_dirs };

// Fixed direction matrix V; rows are unit-norm and deduplicated.
struct Template {
  Mat dirs;  // L x n

  std::size_t n_dirs() const { return dirs.rows; }
  std::size_t dim() const { return dirs.cols; }

  static Template from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw BadDimension("template needs at least one row");
    const std::size_t n = rows.front().size();
    std::vector<Vec> kept;
    for (const auto& r : rows) {
      if (r.size() != n) throw BadDimension("template rows have mixed dims");
      double nr = norm2(r);
      if (nr == 0.0) throw BadDimension("template row has zero norm");
      Vec u = scaled(r, 1.0 / nr);
      bool dup = false;
      for (const auto& k : kept) {
        // rows within angle ~1e-9 are merged
        if (dist2(k, u) < 1e-9) {
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(std::move(u));
    }
    Template t;
    t.dirs = Mat(kept.size(), n);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) t.dirs.at(i, j) = kept[i][j];
    }
    return t;
  }
};

inline Template make_template(TemplateKind kind, std::size_t n,
                              std::size_t n_dirs_requested = 0,
                              std::uint64_t seed = 0) {
  std::vector<Vec> rows;
  switch (kind) {
    case TemplateKind::box: {
      if (n < 1) throw BadDimension("box template needs n >= 1");
      for (std::size_t j = 0; j < n; ++j) {
        Vec plus(n, 0.0), minus(n, 0.0);
        plus[j] = 1.0;
        minus[j] = -1.0;
        rows.push_back(plus);
        rows.push_back(minus);
      }
      break;
    }
    case TemplateKind::octagon: {
      if (n != 2) throw BadDimension("octagon template requires n = 2");
      for (int k = 0; k < 8; ++k) {
        double a = k * std::numbers::pi / 4.0;
        rows.push_back({std::cos(a), std::sin(a)});
      }
      break;
    }
    case TemplateKind::circle_uniform: {
      if (n != 2) throw BadDimension("circle_uniform template requires n = 2");
      if (n_dirs_requested < 3) {
        throw BadDimension("circle_uniform needs L >= 3");
      }
      for (std::size_t k = 0; k < n_dirs_requested; ++k) {
        double a = 2.0 * std::numbers::pi * static_cast<double>(k) /
                   static_cast<double>(n_dirs_requested);
        rows.push_back({std::cos(a), std::sin(a)});
      }
      break;
    }
    case TemplateKind::random_dirs: {
      if (n_dirs_requested < n + 1) {
        throw BadDimension("random_dirs needs L >= n+1");
      }
      Rng rng(Rng::derive(seed, "template", 0));
      while (rows.size() < n_dirs_requested) {
        Vec r(n);
        for (double& v : r) v = rng.gaussian();
        if (norm2(r) < 1e-12) continue;
        rows.push_back(std::move(r));
      }
      break;
    }
  }
  Template t = Template::from_rows(rows);
  if (kind == TemplateKind::random_dirs) {
    // deduplication may have dropped rows; resample until we have L distinct
    Rng rng(Rng::derive(seed, "template_extra", 0));
    std::vector<Vec> all;
    for (std::size_t i = 0; i < t.n_dirs(); ++i) all.push_back(t.dirs.row_vec(i));
    while (all.size() < n_dirs_requested) {
      Vec r(n);
      for (double& v : r) v = rng.gaussian();
      if (norm2(r) < 1e-12) continue;
      all.push_back(std::move(r));
      t = Template::from_rows(all);
      all.clear();
      for (std::size_t i = 0; i < t.n_dirs(); ++i) all.push_back(t.dirs.row_vec(i));
    }
  }
  return t;
}

// Scenario sample-size bound: smallest integer N with
// N >= (1/eps1) * (e/(e-1)) * (ln(1/beta1) + n + L).
inline std::size_t scenario_sample_size(double eps1, double beta1,
                                        std::size_t n, std::size_t n_dirs) {
  if (!(eps1 > 0.0 && eps1 < 1.0) || !(beta1 > 0.0 && beta1 < 1.0)) {
    throw OutOfRange("scenario_sample_size: eps1, beta1 must lie in (0,1)");
  }
  const double e = std::numbers::e;
  double bound = (1.0 / eps1) * (e / (e - 1.0)) *
                 (std::log(1.0 / beta1) + static_cast<double>(n) +
                  static_cast<double>(n_dirs));
  double c = std::ceil(bound - 1e-9);
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

// Binomial tail of the scenario bound: sum_{i=0}^{d-1} C(N,i) eps^i (1-eps)^{N-i},
// accumulated in log space.
inline double scenario_confidence(std::size_t n_samples, double eps,
                                  std::size_t d) {
  if (d < 1 || d > n_samples) {
    throw OutOfRange("scenario_confidence: need 1 <= d <= N");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw OutOfRange("scenario_confidence: eps must lie in (0,1)");
  }
  const double log_eps = std::log(eps);
  const double log_1m = std::log1p(-eps);
  const double logN1 = std::lgamma(static_cast<double>(n_samples) + 1.0);
  std::vector<double> terms(d);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    double di = static_cast<double>(i);
    double dn = static_cast<double>(n_samples);
    double lt = logN1 - std::lgamma(di + 1.0) - std::lgamma(dn - di + 1.0) +
                di * log_eps + (dn - di) * log_1m;
    terms[i] = lt;
    mx = std::max(mx, lt);
  }
  double s = 0.0;
  for (double lt : terms) s += std::exp(lt - mx);
  return std::min(1.0, std::exp(mx) * s);
}

struct FittedSupport {
  Template tmpl;
  Vec theta;  // L offsets
  std::size_t n_used = 0;
  double eps1 = 0.0;
  double beta1 = 0.0;
  bool sufficient_samples = false;
};

inline FittedSupport fit_support(const Template& tmpl,
                                 const OutputSamples& samples, double eps1,
                                 double beta1) {
  if (samples.dim() != tmpl.dim()) {
    throw DimensionMismatch("fit_support: sample dim does not match template");
  }
  if (samples.count() < 1) throw OutOfRange("fit_support: need N >= 1");
  FittedSupport fs;
  fs.tmpl = tmpl;
  fs.theta.assign(tmpl.n_dirs(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < samples.count(); ++k) {
    auto y = samples.points.row(k);
    for (std::size_t i = 0; i < tmpl.n_dirs(); ++i) {
      fs.theta[i] = std::max(fs.theta[i], dot(tmpl.dirs.row(i), y));
    }
  }
  fs.n_used = samples.count();
  fs.eps1 = eps1;
  fs.beta1 = beta1;
  fs.sufficient_samples =
      samples.count() >=
      scenario_sample_size(eps1, beta1, tmpl.dim(), tmpl.n_dirs());
  return fs;
}

inline bool contains(const FittedSupport& fs, std::span<const double> y,
                     double tol = 1e-9) {
  if (y.size() != fs.tmpl.dim()) {
    throw DimensionMismatch("contains: point dim does not match support");
  }
  for (std::size_t i = 0; i < fs.tmpl.n_dirs(); ++i) {
    if (dot(fs.tmpl.dirs.row(i), y) > fs.theta[i] + tol) return false;
  }
  return true;
}

inline bool contains(const FittedSupport& fs, const Vec& y, double tol = 1e-9) {
  return contains(fs, std::span<const double>(y), tol);
}

inline double violation_rate(const FittedSupport& fs,
                             const OutputSamples& holdout) {
  std::size_t bad = 0;
  for (std::size_t k = 0; k < holdout.count(); ++k) {
    if (!contains(fs, holdout.points.row(k))) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(holdout.count());
}

namespace detail {

// Coordinate-wise interval of the polytope {Vz <= theta}. Exact when the
// template carries +/- axis rows; for n=2 falls back to vertex enumeration.
inline std::pair<Vec, Vec> polytope_bbox(const FittedSupport& fs) {
  const std::size_t n = fs.tmpl.dim();
  const std::size_t L = fs.tmpl.n_dirs();
  Vec lo(n, std::numeric_limits<double>::quiet_NaN());
  Vec hi(n, std::numeric_limits<double>::quiet_NaN());
  bool all_axes = true;
  for (std::size_t j = 0; j < n; ++j) {
    bool got_hi = false, got_lo = false;
    for (std::size_t i = 0; i < L; ++i) {
      auto r = fs.tmpl.dirs.row(i);
      bool is_plus = true, is_minus = true;
      for (std::size_t c = 0; c < n; ++c) {
        double want = (c == j) ? 1.0 : 0.0;
        if (std::abs(r[c] - want) > 1e-12) is_plus = false;
        if (std::abs(r[c] + want) > 1e-12) is_minus = false;
      }
      if (is_plus) {
        hi[j] = got_hi ? std::min(hi[j], fs.theta[i]) : fs.theta[i];
        got_hi = true;
      }
      if (is_minus) {
        lo[j] = got_lo ? std::max(lo[j], -fs.theta[i]) : -fs.theta[i];
        got_lo = true;
      }
    }
    if (!got_hi || !got_lo) all_axes = false;
  }
  if (all_axes) return {lo, hi};

  if (n != 2) {
    throw UnboundedPolytope(
        "diameter bound needs +/- axis template rows for n > 2");
  }
  // 2-D: bounded iff no angular gap of the direction set reaches pi
  std::vector<double> angles;
  for (std::size_t i = 0; i < L; ++i) {
    auto r = fs.tmpl.dirs.row(i);
    angles.push_back(std::atan2(r[1], r[0]));
  }
  std::sort(angles.begin(), angles.end());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    double next = (i + 1 < angles.size())
                      ? angles[i + 1]
                      : angles[0] + 2.0 * std::numbers::pi;
    if (next - angles[i] >= std::numbers::pi - 1e-12) {
      throw UnboundedPolytope("2-D template leaves an uncovered half-plane");
    }
  }
  // vertex enumeration over row pairs
  lo.assign(2, std::numeric_limits<double>::infinity());
  hi.assign(2, -std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = i + 1; j < L; ++j) {
      auto a = fs.tmpl.dirs.row(i);
      auto b = fs.tmpl.dirs.row(j);
      double det = a[0] * b[1] - a[1] * b[0];
      if (std::abs(det) < 1e-12) continue;
      double x = (fs.theta[i] * b[1] - a[1] * fs.theta[j]) / det;
      double y = (a[0] * fs.theta[j] - fs.theta[i] * b[0]) / det;
      Vec v{x, y};
      if (!contains(fs, v, 1e-7)) continue;
      any = true;
      lo[0] = std::min(lo[0], x);
      lo[1] = std::min(lo[1], y);
      hi[0] = std::max(hi[0], x);
      hi[1] = std::max(hi[1], y);
    }
  }
  if (!any) {
    // degenerate: fall back to zero-size box (polytope fitted from one point
    // collapses to it)
    throw UnboundedPolytope("2-D vertex enumeration found no vertices");
  }
  return {lo, hi};
}

}  // namespace detail

// Conservative Euclidean diameter via the axis-aligned bounding-box diagonal.
inline double diameter_bound(const FittedSupport& fs) {
  auto [lo, hi] = detail::polytope_bbox(fs);
  double s = 0.0;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    double w = std::max(0.0, hi[j] - lo[j]);
    s += w * w;
  }
  return std::sqrt(s);
}

inline nlohmann::json support_to_json(const FittedSupport& fs) {
  nlohmann::json j;
  j["V"] = nlohmann::json::array();
  for (std::size_t i = 0; i < fs.tmpl.n_dirs(); ++i) {
    j["V"].push_back(fs.tmpl.dirs.row_vec(i));
  }
  j["theta"] = fs.theta;
  j["N_used"] = fs.n_used;
  j["eps1"] = fs.eps1;
  j["beta1"] = fs.beta1;
  j["sufficient_samples"] = fs.sufficient_samples;
  return j;
}

inline FittedSupport support_from_json(const nlohmann::json& j) {
  std::vector<Vec> rows;
  for (const auto& r : j.at("V")) rows.push_back(r.get<Vec>());
  FittedSupport fs;
  fs.tmpl = Template::from_rows(rows);
  fs.theta = j.at("theta").get<Vec>();
  fs.n_used = j.at("N_used").get<std::size_t>();
  fs.eps1 = j.at("eps1").get<double>();
  fs.beta1 = j.at("beta1").get<double>();
  fs.sufficient_samples = j.at("sufficient_samples").get<bool>();
  if (fs.theta.size() != fs.tmpl.n_dirs()) {
    throw MalformedFile("support record: theta length mismatch");
  }
  return fs;
}

}  // namespace rcert
