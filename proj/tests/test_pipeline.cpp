#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rcert/pipeline.hpp"

using namespace rcert;
using nlohmann::json;

namespace {

json base_config() {
  json j;
  j["model"]["synth"] = {{"arch", {2, 2}},
                         {"activation", "tanh"},
                         {"weight_scale", 1.0},
                         {"std_scale", 0.05},
                         {"seed", 3}};
  j["input"] = {{"kind", "uniform_box"}, {"center", {0.0, 0.0}},
                {"radius", 0.1}};
  j["perf"] = {{"kind", "affine"}, {"a", {1.0, 0.0}}, {"b", 0.0}};
  j["template"] = {{"kind", "box"}};
  j["support"] = {{"eps1", 0.05}, {"beta1", 0.05}};
  j["risk"] = {{"alphas", {1.0, 0.5, 0.25}}, {"beta", 0.05}, {"H", 0.1},
               {"rho", 1.0}};
  j["samples"] = {{"N", 300}, {"holdout", 500}};
  j["seed"] = 9001;
  j["out_dir"] = (std::filesystem::temp_directory_path() /
                  "rcert_pipeline_test").string();
  return j;
}

json strip_timing(json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("config validation") {
  json j = base_config();
  REQUIRE_NOTHROW(parse_config(j));

  SECTION("alpha outside (0,1] rejected") {
    j["risk"]["alphas"] = {0.0};
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);
  }
  SECTION("missing seed rejected") {
    j.erase("seed");
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);
  }
  SECTION("zero validate holdout rejected") {
    j["validate"] = {{"trials", 2}, {"holdout", 0}};
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);
  }
  SECTION("samples N must be a count or plan") {
    j["samples"]["N"] = "everything";
    REQUIRE_THROWS_AS(parse_config(j), ConfigError);
  }
  SECTION("unknown input kind rejected") {
    j["input"] = {{"kind", "cauchy"}};
    RunConfig cfg = parse_config(j);
    BnnModel m = build_model(cfg);
    REQUIRE_THROWS_AS(build_input(cfg, m), ConfigError);
  }
  SECTION("perf dimension mismatch rejected") {
    j["perf"] = {{"kind", "one_minus_y"}};
    RunConfig cfg = parse_config(j);
    BnnModel m = build_model(cfg);
    REQUIRE_THROWS_AS(build_perf(cfg, m), ConfigError);
  }
  SECTION("input dimension mismatch rejected") {
    j["input"] = {{"kind", "point_mass"}, {"x", {1.0}}};
    RunConfig cfg = parse_config(j);
    BnnModel m = build_model(cfg);
    REQUIRE_THROWS_AS(build_input(cfg, m), ConfigError);
  }
}

TEST_CASE("plan reproduces the published scenario sample size") {
  json j = base_config();
  j["template"] = {{"kind", "circle_uniform"}, {"L", 16}};
  RunConfig cfg = parse_config(j);
  PlanResult plan = run_plan(cfg);
  REQUIRE(plan.scenario_n == 665);
  REQUIRE(plan.cvar_n.size() == 3);

  // n=1 planner asymptotics: second alpha (0.5) needs about 4x the first
  double r = static_cast<double>(plan.cvar_n[1].second) /
             static_cast<double>(plan.cvar_n[0].second);
  REQUIRE(r >= 3.8);
  REQUIRE(r <= 4.0);

  json pj = plan.to_json();
  REQUIRE(pj["scenario_N"] == 665);
}

TEST_CASE("certify pipeline is deterministic and self-consistent") {
  json j = base_config();
  RunConfig cfg = parse_config(j);

  json r1 = run_certify(cfg);
  json r2 = run_certify(cfg);
  REQUIRE(strip_timing(r1) == strip_timing(r2));

  REQUIRE(r1["gamma_robustness"].get<double>() == Catch::Approx(0.2));
  REQUIRE(r1["samples"]["N"] == 300);
  REQUIRE(r1["config"] == cfg.raw);

  // every certificate round-trips through the record format
  for (const auto& cj : r1["certificates"]) {
    Certificate c = certificate_from_json(cj);
    REQUIRE(certificate_to_json(c) == cj);
    REQUIRE(c.confidence > 0.0);
    REQUIRE(c.confidence < 1.0);
  }

  // the support record in the report reloads
  FittedSupport fs = support_from_json(r1["support"]);
  REQUIRE(fs.n_used == 300);

  // output files exist and the report file matches the returned report
  auto dir = std::filesystem::path(cfg.out_dir);
  REQUIRE(std::filesystem::exists(dir / "samples.csv"));
  REQUIRE(std::filesystem::exists(dir / "samples.meta.json"));
  REQUIRE(std::filesystem::exists(dir / "support.json"));
  json on_disk;
  std::ifstream in(dir / "report.json");
  in >> on_disk;
  REQUIRE(strip_timing(on_disk) == strip_timing(r1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("degenerate pipeline pins the cvar interval at h(f(x))") {
  json j = base_config();
  j["model"]["synth"]["std_scale"] = 0.0;
  j["input"] = {{"kind", "point_mass"}, {"x", {0.2, -0.1}}};
  j["samples"] = {{"N", 50}, {"holdout", 50}};
  j["out_dir"] = (std::filesystem::temp_directory_path() /
                  "rcert_pipeline_degenerate").string();
  RunConfig cfg = parse_config(j);

  BnnModel model = build_model(cfg);
  Rng rng(0);
  Vec y = forward(model, sample_weights(model, rng), {0.2, -0.1});
  double hval = y[0];  // perf is affine a=(1,0), b=0

  json r = run_certify(cfg);
  for (const auto& e : r["diagnostics"]["empirical_cvar"]) {
    REQUIRE(e["cvar"].get<double>() == Catch::Approx(hval).margin(1e-9));
    REQUIRE(e["var"].get<double>() == Catch::Approx(hval).margin(1e-9));
  }
  for (const auto& cj : r["certificates"]) {
    if (cj["kind"] == "cvar_interval") {
      double mid = (cj["values"]["lower"].get<double>() +
                    cj["values"]["upper"].get<double>()) / 2.0;
      REQUIRE(mid == Catch::Approx(hval).margin(1e-9));
    }
  }
  REQUIRE(r["diagnostics"]["holdout_violation_rate"].get<double>() == 0.0);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("plan mode resolves N as the max of both planners") {
  json j = base_config();
  j["samples"]["N"] = "plan";
  j["samples"]["holdout"] = 200;
  j["risk"]["alphas"] = {1.0};
  j["risk"]["rho"] = 0.01;  // tiny rho so the scenario bound dominates
  j["out_dir"] = (std::filesystem::temp_directory_path() /
                  "rcert_pipeline_plan").string();
  RunConfig cfg = parse_config(j);
  REQUIRE_FALSE(cfg.n_samples.has_value());

  PlanResult plan = run_plan(cfg);
  std::size_t expect = plan.scenario_n;
  for (const auto& [a, n] : plan.cvar_n) expect = std::max(expect, n);

  json r = run_certify(cfg);
  REQUIRE(r["samples"]["N"].get<std::size_t>() == expect);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("validate mode reports one rate per trial") {
  json j = base_config();
  j["validate"] = {{"trials", 3}, {"holdout", 200}};
  j["samples"] = {{"N", 150}, {"holdout", 200}};
  RunConfig cfg = parse_config(j);
  json r = run_validate(cfg);
  REQUIRE(r["trials"] == 3);
  REQUIRE(r["violation_rates"].size() == 3);
  double ff = r["failure_fraction"].get<double>();
  REQUIRE(ff >= 0.0);
  REQUIRE(ff <= 1.0);
}
