#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include "rcert/errors.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

struct AffinePerf {
  Vec a;
  double b = 0.0;
};

// max_i (a_i . y + b_i)
struct PiecewiseMaxAffine {
  std::vector<std::pair<Vec, double>> pieces;
};

struct OneMinusY {};

struct AbsDeviation {
  double target = 0.0;
};

// max_{i != c} y_i - y_c  on class-probability (or logit) outputs
struct Margin {
  std::size_t true_class = 0;
  std::size_t classes = 2;
};

struct PerfFn {
  std::variant<AffinePerf, PiecewiseMaxAffine, OneMinusY, AbsDeviation, Margin>
      variant;

  void validate() const {
    if (const auto* p = std::get_if<PiecewiseMaxAffine>(&variant)) {
      if (p->pieces.empty()) {
        throw OutOfRange("piecewise-max-affine needs at least one piece");
      }
      for (const auto& [a, b] : p->pieces) {
        if (a.size() != p->pieces.front().first.size()) {
          throw DimensionMismatch("piecewise pieces have mixed dimensions");
        }
      }
    } else if (const auto* m = std::get_if<Margin>(&variant)) {
      if (m->classes < 2 || m->true_class >= m->classes) {
        throw OutOfRange("margin needs classes >= 2 and true_class < classes");
      }
    }
  }

  // 0 means "any scalar/vector of matching size is checked at eval time"
  std::size_t dim() const {
    if (const auto* a = std::get_if<AffinePerf>(&variant)) return a->a.size();
    if (const auto* p = std::get_if<PiecewiseMaxAffine>(&variant)) {
      return p->pieces.front().first.size();
    }
    if (std::get_if<OneMinusY>(&variant)) return 1;
    if (std::get_if<AbsDeviation>(&variant)) return 1;
    return std::get<Margin>(variant).classes;
  }

  bool is_convex() const { return true; }  // every shipped variant is convex
  bool is_concave() const {
    // only the affine variants are also concave
    if (std::get_if<AffinePerf>(&variant)) return true;
    if (std::get_if<OneMinusY>(&variant)) return true;
    if (const auto* p = std::get_if<PiecewiseMaxAffine>(&variant)) {
      return p->pieces.size() == 1;
    }
    return false;
  }
};

inline double eval_h(const PerfFn& h, const Vec& y) {
  if (y.size() != h.dim()) {
    throw DimensionMismatch("eval_h: argument dimension mismatch");
  }
  return std::visit(
      [&y](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AffinePerf>) {
          return dot(f.a, y) + f.b;
        } else if constexpr (std::is_same_v<T, PiecewiseMaxAffine>) {
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& [a, b] : f.pieces) best = std::max(best, dot(a, y) + b);
          return best;
        } else if constexpr (std::is_same_v<T, OneMinusY>) {
          return 1.0 - y[0];
        } else if constexpr (std::is_same_v<T, AbsDeviation>) {
          return std::abs(f.target - y[0]);
        } else {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < f.classes; ++i) {
            if (i == f.true_class) continue;
            best = std::max(best, y[i]);
          }
          return best - y[f.true_class];
        }
      },
      h.variant);
}

// Lipschitz constant under the Euclidean norm.
inline double lipschitz_const(const PerfFn& h) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AffinePerf>) {
          return norm2(f.a);
        } else if constexpr (std::is_same_v<T, PiecewiseMaxAffine>) {
          double best = 0.0;
          for (const auto& [a, b] : f.pieces) best = std::max(best, norm2(a));
          return best;
        } else if constexpr (std::is_same_v<T, OneMinusY>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, AbsDeviation>) {
          return 1.0;
        } else {
          // each piece gradient is e_i - e_c
          return std::sqrt(2.0);
        }
      },
      h.variant);
}

// Exact max-of-affine representation; every shipped variant is representable.
inline PiecewiseMaxAffine as_piecewise(const PerfFn& h) {
  return std::visit(
      [](const auto& f) -> PiecewiseMaxAffine {
        using T = std::decay_t<decltype(f)>;
        PiecewiseMaxAffine out;
        if constexpr (std::is_same_v<T, AffinePerf>) {
          out.pieces.push_back({f.a, f.b});
        } else if constexpr (std::is_same_v<T, PiecewiseMaxAffine>) {
          out = f;
        } else if constexpr (std::is_same_v<T, OneMinusY>) {
          out.pieces.push_back({{-1.0}, 1.0});
        } else if constexpr (std::is_same_v<T, AbsDeviation>) {
          out.pieces.push_back({{1.0}, -f.target});
          out.pieces.push_back({{-1.0}, f.target});
        } else {
          for (std::size_t i = 0; i < f.classes; ++i) {
            if (i == f.true_class) continue;
            Vec a(f.classes, 0.0);
            a[i] = 1.0;
            a[f.true_class] = -1.0;
            out.pieces.push_back({std::move(a), 0.0});
          }
        }
        return out;
      },
      h.variant);
}

// Upper bound on |h| over any set contained in the Euclidean ball of radius
// R about the origin: max_i (||a_i|| R + |b_i|).
inline double h_max_bound(const PerfFn& h, double radius) {
  double best = 0.0;
  for (const auto& [a, b] : as_piecewise(h).pieces) {
    best = std::max(best, norm2(a) * radius + std::abs(b));
  }
  return best;
}

}  // namespace rcert
