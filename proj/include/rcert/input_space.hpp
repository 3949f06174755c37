#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

#include "rcert/errors.hpp"
#include "rcert/rng.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  Vec pixels;  // row-major, values in [0, 1]

  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }

  void validate() const {
    if (pixels.size() != height * width) {
      throw ShapeMismatch("image pixel count does not match height*width");
    }
    for (double p : pixels) {
      if (p < 0.0 || p > 1.0 || !std::isfinite(p)) {
        throw OutOfRange("image pixel outside [0,1]");
      }
    }
  }
};

// Rotation about the image centre, bilinear interpolation, out-of-frame
// reads 0, output clipped back to [0,1].
inline Image rotate_image(const Image& img, double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a);
  const double sa = std::sin(a);
  const double cr = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cc = (static_cast<double>(img.width) - 1.0) / 2.0;
  Image out;
  out.height = img.height;
  out.width = img.width;
  out.pixels.assign(img.pixels.size(), 0.0);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      // inverse map: rotate the output coordinate back by -angle
      const double dr = static_cast<double>(r) - cr;
      const double dc = static_cast<double>(c) - cc;
      const double sr = cr + ca * dr + sa * dc;
      const double sc = cc - sa * dr + ca * dc;
      const double fr = std::floor(sr);
      const double fc = std::floor(sc);
      const double wr = sr - fr;
      const double wc = sc - fc;
      auto sample = [&](double rr, double ccc) -> double {
        if (rr < 0 || ccc < 0 || rr >= static_cast<double>(img.height) ||
            ccc >= static_cast<double>(img.width)) {
          return 0.0;
        }
        return img.at(static_cast<std::size_t>(rr),
                      static_cast<std::size_t>(ccc));
      };
      double v = (1 - wr) * (1 - wc) * sample(fr, fc) +
                 (1 - wr) * wc * sample(fr, fc + 1) +
                 wr * (1 - wc) * sample(fr + 1, fc) +
                 wr * wc * sample(fr + 1, fc + 1);
      out.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

// pixel -> clip(0.5 + factor*(pixel - 0.5), 0, 1)
inline Image adjust_contrast(const Image& img, double factor) {
  if (factor < 0.0) throw OutOfRange("contrast factor must be >= 0");
  Image out = img;
  for (double& p : out.pixels) {
    p = std::clamp(0.5 + factor * (p - 0.5), 0.0, 1.0);
  }
  return out;
}

struct UniformBox {
  Vec center;
  Vec radius;  // per-dimension, broadcast a scalar at construction

  UniformBox() = default;
  UniformBox(Vec c, Vec r) : center(std::move(c)), radius(std::move(r)) {}
  UniformBox(Vec c, double r) : center(std::move(c)), radius(center.size(), r) {}
};

struct GaussianInput {
  Vec mean;
  Vec std;
};

struct RotationPerturb {
  Image base;
  double angle_lo = 0.0;  // degrees
  double angle_hi = 0.0;
};

struct ContrastPerturb {
  Image base;
  double factor_lo = 1.0;
  double factor_hi = 1.0;
};

struct PointMass {
  Vec x;
};

struct InputDistribution {
  std::variant<UniformBox, GaussianInput, RotationPerturb, ContrastPerturb,
               PointMass>
      variant;

  std::size_t dim() const {
    return std::visit(
        [](const auto& d) -> std::size_t {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, UniformBox>) return d.center.size();
          else if constexpr (std::is_same_v<T, GaussianInput>) return d.mean.size();
          else if constexpr (std::is_same_v<T, RotationPerturb>) return d.base.pixels.size();
          else if constexpr (std::is_same_v<T, ContrastPerturb>) return d.base.pixels.size();
          else return d.x.size();
        },
        variant);
  }

  void validate() const {
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, UniformBox>) {
            if (d.radius.size() != d.center.size()) {
              throw ShapeMismatch("uniform box radius/center length mismatch");
            }
            for (double r : d.radius) {
              if (r < 0.0) throw OutOfRange("uniform box radius must be >= 0");
            }
          } else if constexpr (std::is_same_v<T, GaussianInput>) {
            if (d.std.size() != d.mean.size()) {
              throw ShapeMismatch("gaussian std/mean length mismatch");
            }
            for (double s : d.std) {
              if (s < 0.0) throw NegativeStd("gaussian input std must be >= 0");
            }
          } else if constexpr (std::is_same_v<T, RotationPerturb>) {
            d.base.validate();
            if (d.angle_lo > d.angle_hi) {
              throw OutOfRange("rotation angle range low > high");
            }
          } else if constexpr (std::is_same_v<T, ContrastPerturb>) {
            d.base.validate();
            if (d.factor_lo > d.factor_hi) {
              throw OutOfRange("contrast factor range low > high");
            }
            if (d.factor_lo < 0.0 || d.factor_hi > 2.0) {
              throw OutOfRange("contrast factor range outside [0,2]");
            }
          } else {
            (void)d;
          }
        },
        variant);
  }
};

inline Vec sample_input(const InputDistribution& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> Vec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformBox>) {
          Vec x(d.center.size());
          for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = d.center[i] + rng.uniform(-d.radius[i], d.radius[i]);
          }
          return x;
        } else if constexpr (std::is_same_v<T, GaussianInput>) {
          Vec x(d.mean.size());
          for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = d.mean[i] + d.std[i] * rng.gaussian();
          }
          return x;
        } else if constexpr (std::is_same_v<T, RotationPerturb>) {
          double angle = rng.uniform(d.angle_lo, d.angle_hi);
          return rotate_image(d.base, angle).pixels;
        } else if constexpr (std::is_same_v<T, ContrastPerturb>) {
          double factor = rng.uniform(d.factor_lo, d.factor_hi);
          return adjust_contrast(d.base, factor).pixels;
        } else {
          return d.x;
        }
      },
      dist.variant);
}

}  // namespace rcert
