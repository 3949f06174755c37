// Command-line front end: plan / sample / fit / certify / validate.
// Exit codes: 0 success, 2 configuration error, 3 numerical or runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rcert/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
};

rcert::RunConfig load(const CommonArgs& args) {
  rcert::RunConfig cfg = rcert::load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.threads) cfg.threads = *args.threads;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")
      ->required();
  cmd->add_option("--seed", args.seed, "override the config root seed");
  cmd->add_option("--out", args.out_dir, "override the output directory");
  cmd->add_option("--threads", args.threads, "sampling worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-averse certification of stochastic neural networks"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* plan = app.add_subcommand("plan", "print required sample sizes");
  auto* sample = app.add_subcommand("sample", "draw and persist output samples");
  auto* fit = app.add_subcommand("fit", "fit the template-polytope support");
  auto* certify =
      app.add_subcommand("certify", "full sample/fit/certify pipeline");
  auto* validate =
      app.add_subcommand("validate", "Monte Carlo check of the fit guarantee");
  for (auto* cmd : {plan, sample, fit, certify, validate}) {
    add_common(cmd, args);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    rcert::RunConfig cfg = load(args);
    if (plan->parsed()) {
      rcert::PlanResult res = rcert::run_plan(cfg);
      std::cout << "scenario N = " << res.scenario_n << "\n";
      for (const auto& [alpha, n] : res.cvar_n) {
        std::cout << "cvar N (alpha=" << alpha << ") = " << n << "\n";
      }
    } else if (sample->parsed()) {
      std::cout << rcert::run_sample(cfg).dump(2) << "\n";
    } else if (fit->parsed()) {
      std::cout << rcert::run_fit(cfg).dump(2) << "\n";
    } else if (certify->parsed()) {
      nlohmann::json report = rcert::run_certify(cfg);
      std::cout << "report written to " << cfg.out_dir << "/report.json\n";
      std::cout << "gamma_robustness = " << report["gamma_robustness"] << "\n";
    } else if (validate->parsed()) {
      std::cout << rcert::run_validate(cfg).dump(2) << "\n";
    }
  } catch (const rcert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
