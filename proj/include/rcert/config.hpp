#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcert/bnn_model.hpp"
#include "rcert/errors.hpp"
#include "rcert/input_space.hpp"
#include "rcert/perf_functions.hpp"
#include "rcert/support_set.hpp"

namespace rcert {

struct SynthSpec {
  std::vector<std::size_t> arch;
  Activation activation = Activation::tanh;
  double weight_scale = 1.0;
  double std_scale = 0.1;
  std::uint64_t seed = 0;
};

struct TemplateSpec {
  TemplateKind kind = TemplateKind::box;
  std::size_t n_dirs = 0;  // for circle_uniform / random_dirs
  std::uint64_t seed = 0;
};

struct SupportSpec {
  double eps1 = 0.05;
  double beta1 = 0.05;
};

struct RiskConfig {
  std::vector<double> alphas{1.0};
  double beta = 0.05;       // confidence error for the CVaR radius (beta2)
  double half_width = 0.1;  // H
  std::optional<double> rho;  // certified diameter bound for the h-values
};

struct ValidateSpec {
  std::size_t trials = 50;
  std::size_t holdout = 10000;
};

struct RunConfig {
  std::optional<std::string> model_path;
  std::optional<SynthSpec> synth;
  nlohmann::json input_json;   // kept verbatim for the report echo
  nlohmann::json perf_json;
  TemplateSpec tmpl;
  SupportSpec support;
  RiskConfig risk;
  std::optional<std::size_t> n_samples;  // nullopt means "plan"
  std::size_t holdout = 10000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  unsigned threads = 1;
  ValidateSpec validate;
  nlohmann::json raw;  // full config echo
};

namespace detail {

inline TemplateKind template_kind_from_string(const std::string& s) {
  if (s == "box") return TemplateKind::box;
  if (s == "octagon") return TemplateKind::octagon;
  if (s == "circle_uniform") return TemplateKind::circle_uniform;
  if (s == "random_dirs") return TemplateKind::random_dirs;
  throw ConfigError("unknown template kind: " + s);
}

inline Image image_from_config(const nlohmann::json& j) {
  Image img;
  img.height = j.at("height").get<std::size_t>();
  img.width = j.at("width").get<std::size_t>();
  if (j.contains("pixels")) {
    img.pixels = j.at("pixels").get<Vec>();
  } else if (j.contains("pixels_csv")) {
    std::ifstream in(j.at("pixels_csv").get<std::string>());
    if (!in) throw ConfigError("cannot open image csv");
    std::string cell;
    while (std::getline(in, cell, ',')) img.pixels.push_back(std::stod(cell));
  } else {
    throw ConfigError("image needs pixels or pixels_csv");
  }
  img.validate();
  return img;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.raw = j;
  try {
    const auto& mj = j.at("model");
    if (mj.contains("path")) {
      cfg.model_path = mj.at("path").get<std::string>();
    } else if (mj.contains("synth")) {
      const auto& sj = mj.at("synth");
      SynthSpec s;
      s.arch = sj.at("arch").get<std::vector<std::size_t>>();
      s.activation =
          activation_from_string(sj.value("activation", std::string("tanh")));
      s.weight_scale = sj.value("weight_scale", 1.0);
      s.std_scale = sj.value("std_scale", 0.1);
      s.seed = sj.value("seed", std::uint64_t{0});
      cfg.synth = std::move(s);
    } else {
      throw ConfigError("model needs either path or synth");
    }

    cfg.input_json = j.at("input");
    cfg.perf_json = j.at("perf");

    if (j.contains("template")) {
      const auto& tj = j.at("template");
      cfg.tmpl.kind =
          detail::template_kind_from_string(tj.value("kind", std::string("box")));
      cfg.tmpl.n_dirs = tj.value("L", std::size_t{0});
      cfg.tmpl.seed = tj.value("seed", std::uint64_t{0});
    }
    if (j.contains("support")) {
      cfg.support.eps1 = j.at("support").value("eps1", 0.05);
      cfg.support.beta1 = j.at("support").value("beta1", 0.05);
    }
    if (!(cfg.support.eps1 > 0 && cfg.support.eps1 < 1) ||
        !(cfg.support.beta1 > 0 && cfg.support.beta1 < 1)) {
      throw ConfigError("support eps1/beta1 must lie in (0,1)");
    }

    const auto& rj = j.at("risk");
    cfg.risk.alphas = rj.at("alphas").get<std::vector<double>>();
    for (double a : cfg.risk.alphas) {
      if (!(a > 0.0 && a <= 1.0)) {
        throw ConfigError("risk alphas must lie in (0,1]");
      }
    }
    cfg.risk.beta = rj.value("beta", 0.05);
    if (!(cfg.risk.beta > 0 && cfg.risk.beta < 1)) {
      throw ConfigError("risk beta must lie in (0,1)");
    }
    cfg.risk.half_width = rj.value("H", 0.1);
    if (!(cfg.risk.half_width > 0)) throw ConfigError("risk H must be > 0");
    if (rj.contains("rho")) {
      cfg.risk.rho = rj.at("rho").get<double>();
      if (*cfg.risk.rho < 0) throw ConfigError("risk rho must be >= 0");
    }

    const auto& sj = j.at("samples");
    if (sj.at("N").is_string()) {
      if (sj.at("N").get<std::string>() != "plan") {
        throw ConfigError("samples N must be a count or \"plan\"");
      }
    } else {
      cfg.n_samples = sj.at("N").get<std::size_t>();
      if (*cfg.n_samples < 1) throw ConfigError("samples N must be >= 1");
    }
    cfg.holdout = sj.value("holdout", std::size_t{10000});

    if (!j.contains("seed")) {
      throw ConfigError("config requires an explicit seed");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.out_dir = j.value("out_dir", std::string("out"));
    cfg.threads = j.value("threads", 1u);

    if (j.contains("validate")) {
      cfg.validate.trials = j.at("validate").value("trials", std::size_t{50});
      cfg.validate.holdout =
          j.at("validate").value("holdout", std::size_t{10000});
      if (cfg.validate.trials < 1 || cfg.validate.holdout < 1) {
        throw ConfigError("validate trials and holdout must be >= 1");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

inline BnnModel build_model(const RunConfig& cfg) {
  if (cfg.model_path) return load_model(*cfg.model_path);
  const SynthSpec& s = *cfg.synth;
  return synth_model(s.arch, s.activation, s.weight_scale, s.std_scale, s.seed);
}

inline InputDistribution build_input(const RunConfig& cfg,
                                     const BnnModel& model) {
  const auto& ij = cfg.input_json;
  InputDistribution dist;
  try {
    std::string kind = ij.at("kind").get<std::string>();
    if (kind == "uniform_box") {
      Vec center = ij.at("center").get<Vec>();
      if (ij.at("radius").is_number()) {
        dist.variant = UniformBox(center, ij.at("radius").get<double>());
      } else {
        dist.variant = UniformBox(center, ij.at("radius").get<Vec>());
      }
    } else if (kind == "gaussian") {
      dist.variant = GaussianInput{ij.at("mean").get<Vec>(),
                                   ij.at("std").get<Vec>()};
    } else if (kind == "point_mass") {
      dist.variant = PointMass{ij.at("x").get<Vec>()};
    } else if (kind == "rotation") {
      RotationPerturb r;
      r.base = detail::image_from_config(ij.at("image"));
      auto range = ij.at("angle_range").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("angle_range needs two values");
      r.angle_lo = range[0];
      r.angle_hi = range[1];
      dist.variant = std::move(r);
    } else if (kind == "contrast") {
      ContrastPerturb c;
      c.base = detail::image_from_config(ij.at("image"));
      auto range = ij.at("factor_range").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("factor_range needs two values");
      c.factor_lo = range[0];
      c.factor_hi = range[1];
      dist.variant = std::move(c);
    } else {
      throw ConfigError("unknown input kind: " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("input config: ") + e.what());
  }
  dist.validate();
  if (dist.dim() != model.input_dim) {
    throw ConfigError("input distribution dimension does not match the model");
  }
  return dist;
}

inline PerfFn build_perf(const RunConfig& cfg, const BnnModel& model) {
  const auto& pj = cfg.perf_json;
  PerfFn h;
  try {
    std::string kind = pj.at("kind").get<std::string>();
    if (kind == "one_minus_y") {
      h.variant = OneMinusY{};
    } else if (kind == "abs_deviation") {
      h.variant = AbsDeviation{pj.at("target").get<double>()};
    } else if (kind == "margin") {
      h.variant = Margin{pj.at("true_class").get<std::size_t>(),
                         pj.at("classes").get<std::size_t>()};
    } else if (kind == "affine") {
      h.variant = AffinePerf{pj.at("a").get<Vec>(), pj.value("b", 0.0)};
    } else if (kind == "piecewise_max_affine") {
      PiecewiseMaxAffine p;
      for (const auto& piece : pj.at("pieces")) {
        p.pieces.push_back(
            {piece.at("a").get<Vec>(), piece.value("b", 0.0)});
      }
      h.variant = std::move(p);
    } else {
      throw ConfigError("unknown perf kind: " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("perf config: ") + e.what());
  }
  h.validate();
  if (h.dim() != model.output_dim) {
    throw ConfigError("performance function dimension does not match model");
  }
  return h;
}

inline Template build_template(const RunConfig& cfg, std::size_t n) {
  return make_template(cfg.tmpl.kind, n, cfg.tmpl.n_dirs, cfg.tmpl.seed);
}

}  // namespace rcert
