#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rcert/config.hpp"
#include "rcert/dro.hpp"
#include "rcert/risk.hpp"
#include "rcert/sampling.hpp"

namespace rcert {

namespace detail {

inline std::string model_id_of(const RunConfig& cfg) {
  if (cfg.model_path) return "file:" + *cfg.model_path;
  std::ostringstream os;
  os << "synth:";
  for (std::size_t d : cfg.synth->arch) os << d << "-";
  os << "seed" << cfg.synth->seed;
  return os.str();
}

inline double planner_rho(const RunConfig& cfg, const PerfFn& h,
                          const FittedSupport* fs) {
  if (cfg.risk.rho) return *cfg.risk.rho;
  if (fs) return lipschitz_const(h) * diameter_bound(*fs);
  throw ConfigError(
      "risk.rho is required for sample planning (no fitted support yet)");
}

}  // namespace detail

struct PlanResult {
  std::size_t scenario_n = 0;
  // one entry per configured alpha
  std::vector<std::pair<double, std::size_t>> cvar_n;
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario_N"] = scenario_n;
    j["cvar_N"] = nlohmann::json::array();
    for (const auto& [alpha, n] : cvar_n) {
      j["cvar_N"].push_back({{"alpha", alpha}, {"N", n}});
    }
    return j;
  }
};

inline PlanResult run_plan(const RunConfig& cfg) {
  BnnModel model = build_model(cfg);
  PerfFn h = build_perf(cfg, model);
  Template tmpl = build_template(cfg, model.output_dim);
  PlanResult out;
  out.scenario_n = scenario_sample_size(cfg.support.eps1, cfg.support.beta1,
                                        tmpl.dim(), tmpl.n_dirs());
  double rho = detail::planner_rho(cfg, h, nullptr);
  for (double alpha : cfg.risk.alphas) {
    RiskSpec spec;
    spec.alpha = alpha;
    spec.beta = cfg.risk.beta;
    spec.half_width = cfg.risk.half_width;
    spec.lipschitz = lipschitz_const(h);
    spec.rho = rho;
    spec.dim = 1;  // planning happens on scalar h-values
    out.cvar_n.push_back({alpha, plan_cvar_samples(spec)});
  }
  return out;
}

// Full sample -> fit -> certify pipeline; returns the report. All numerical
// content is a deterministic function of (config, seed); wall-clock timing is
// confined to the top-level "timing" object.
inline nlohmann::json run_certify(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();

  BnnModel model = build_model(cfg);
  InputDistribution dist = build_input(cfg, model);
  PerfFn h = build_perf(cfg, model);
  Template tmpl = build_template(cfg, model.output_dim);

  std::size_t n_samples;
  if (cfg.n_samples) {
    n_samples = *cfg.n_samples;
  } else {
    PlanResult plan = run_plan(cfg);
    n_samples = plan.scenario_n;
    for (const auto& [alpha, n] : plan.cvar_n) {
      n_samples = std::max(n_samples, n);
    }
  }

  OutputSamples samples = collect_outputs(
      model, dist, n_samples, Rng::derive(cfg.seed, "samples", 0), cfg.threads,
      detail::model_id_of(cfg), cfg.input_json.dump());
  FittedSupport fs =
      fit_support(tmpl, samples, cfg.support.eps1, cfg.support.beta1);

  OutputSamples holdout = collect_outputs(
      model, dist, cfg.holdout, Rng::derive(cfg.seed, "holdout", 0),
      cfg.threads);
  double emp_violation = violation_rate(fs, holdout);

  Vec h_values = perf_samples(samples, h);
  const double lip = lipschitz_const(h);
  double rho_h = cfg.risk.rho ? *cfg.risk.rho : lip * diameter_bound(fs);

  nlohmann::json report;
  report["config"] = cfg.raw;
  report["samples"] = {{"N", n_samples},
                       {"seed", samples.seed},
                       {"model_id", samples.model_id},
                       {"holdout_N", cfg.holdout}};
  report["support"] = support_to_json(fs);
  report["diagnostics"] = {{"holdout_violation_rate", emp_violation},
                           {"monte_carlo_perf", monte_carlo_perf(samples, h)},
                           {"diameter_bound", diameter_bound(fs)}};
  report["gamma_robustness"] = gamma_robustness(cfg.risk.half_width);

  nlohmann::json certs = nlohmann::json::array();

  {
    Certificate sc;
    sc.kind = "support_set";
    sc.values["violation_bound"] = cfg.support.eps1;
    sc.values["empirical_violation"] = emp_violation;
    sc.confidence = 1.0 - cfg.support.beta1;
    sc.guarantee["eps1"] = cfg.support.eps1;
    sc.guarantee["beta1"] = cfg.support.beta1;
    sc.guarantee["N"] = static_cast<double>(n_samples);
    if (!fs.sufficient_samples) {
      sc.warnings.push_back("insufficient samples for the scenario guarantee");
    }
    certs.push_back(certificate_to_json(sc));
  }

  nlohmann::json empirical_cvar = nlohmann::json::array();
  for (double alpha : cfg.risk.alphas) {
    RiskSpec spec;
    spec.alpha = alpha;
    spec.beta = cfg.risk.beta;
    spec.half_width = cfg.risk.half_width;
    spec.lipschitz = lip;
    spec.rho = rho_h;
    spec.dim = 1;
    Certificate c = cvar_certified_interval(h_values, spec);
    if (!cfg.risk.rho) {
      c.warnings.push_back(
          "rho derived as L0 * support diameter bound (no risk.rho in config)");
    }
    certs.push_back(certificate_to_json(c));
    empirical_cvar.push_back(
        {{"alpha", alpha}, {"cvar", cvar_alpha(h_values, alpha)},
         {"var", var_alpha(h_values, alpha)}});
  }
  report["diagnostics"]["empirical_cvar"] = empirical_cvar;

  {
    PerfBoundOptions opts;
    opts.dro.grid = n_samples > 200 ? 64 : 256;
    PerfBounds pb = certify_perf_bounds(h, samples, fs, cfg.risk.beta, opts);
    if (pb.upper) certs.push_back(certificate_to_json(*pb.upper));
    if (pb.lower) certs.push_back(certificate_to_json(*pb.lower));
  }
  report["certificates"] = certs;

  auto t1 = std::chrono::steady_clock::now();
  report["timing"] = {
      {"total_seconds",
       std::chrono::duration<double>(t1 - t0).count()}};

  // persist
  namespace fsys = std::filesystem;
  fsys::create_directories(cfg.out_dir);
  save_samples_csv(samples, cfg.out_dir + "/samples.csv", &h_values);
  save_samples_meta(samples, cfg.out_dir + "/samples.meta.json");
  {
    std::ofstream out(cfg.out_dir + "/support.json");
    out << support_to_json(fs).dump(2) << "\n";
  }
  {
    std::ofstream out(cfg.out_dir + "/report.json");
    out << report.dump(2) << "\n";
  }
  return report;
}

// Repeated fits over fresh seeds; reports the fraction of trials whose
// holdout-estimated violation mass exceeds eps1, against the beta1 target.
inline nlohmann::json run_validate(const RunConfig& cfg) {
  BnnModel model = build_model(cfg);
  InputDistribution dist = build_input(cfg, model);
  Template tmpl = build_template(cfg, model.output_dim);
  std::size_t fit_n = cfg.n_samples.value_or(scenario_sample_size(
      cfg.support.eps1, cfg.support.beta1, tmpl.dim(), tmpl.n_dirs()));

  std::size_t failures = 0;
  nlohmann::json rates = nlohmann::json::array();
  for (std::size_t t = 0; t < cfg.validate.trials; ++t) {
    OutputSamples fit = collect_outputs(
        model, dist, fit_n, Rng::derive(cfg.seed, "validate_fit", t),
        cfg.threads);
    FittedSupport fs =
        fit_support(tmpl, fit, cfg.support.eps1, cfg.support.beta1);
    OutputSamples holdout = collect_outputs(
        model, dist, cfg.validate.holdout,
        Rng::derive(cfg.seed, "validate_holdout", t), cfg.threads);
    double rate = violation_rate(fs, holdout);
    rates.push_back(rate);
    if (rate > cfg.support.eps1) ++failures;
  }
  nlohmann::json report;
  report["trials"] = cfg.validate.trials;
  report["fit_N"] = fit_n;
  report["holdout_N"] = cfg.validate.holdout;
  report["eps1"] = cfg.support.eps1;
  report["beta1"] = cfg.support.beta1;
  report["violation_rates"] = rates;
  report["failure_fraction"] =
      static_cast<double>(failures) / static_cast<double>(cfg.validate.trials);
  return report;
}

inline nlohmann::json run_sample(const RunConfig& cfg) {
  BnnModel model = build_model(cfg);
  InputDistribution dist = build_input(cfg, model);
  PerfFn h = build_perf(cfg, model);
  std::size_t n_samples = cfg.n_samples.value_or(scenario_sample_size(
      cfg.support.eps1, cfg.support.beta1, model.output_dim,
      build_template(cfg, model.output_dim).n_dirs()));
  OutputSamples samples = collect_outputs(
      model, dist, n_samples, Rng::derive(cfg.seed, "samples", 0), cfg.threads,
      detail::model_id_of(cfg), cfg.input_json.dump());
  Vec h_values = perf_samples(samples, h);
  std::filesystem::create_directories(cfg.out_dir);
  save_samples_csv(samples, cfg.out_dir + "/samples.csv", &h_values);
  save_samples_meta(samples, cfg.out_dir + "/samples.meta.json");
  nlohmann::json j;
  j["N"] = n_samples;
  j["out"] = cfg.out_dir + "/samples.csv";
  return j;
}

inline nlohmann::json run_fit(const RunConfig& cfg) {
  BnnModel model = build_model(cfg);
  InputDistribution dist = build_input(cfg, model);
  Template tmpl = build_template(cfg, model.output_dim);
  std::size_t n_samples = cfg.n_samples.value_or(scenario_sample_size(
      cfg.support.eps1, cfg.support.beta1, tmpl.dim(), tmpl.n_dirs()));
  OutputSamples samples = collect_outputs(
      model, dist, n_samples, Rng::derive(cfg.seed, "samples", 0), cfg.threads);
  FittedSupport fs =
      fit_support(tmpl, samples, cfg.support.eps1, cfg.support.beta1);
  std::filesystem::create_directories(cfg.out_dir);
  nlohmann::json j = support_to_json(fs);
  std::ofstream out(cfg.out_dir + "/support.json");
  out << j.dump(2) << "\n";
  return j;
}

}  // namespace rcert
