// Acceptance suite: one pass/fail line per criterion. Exit code 0 only when
// every criterion passes. Tolerances are pinned here, not configurable.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rcert/dro.hpp"
#include "rcert/pipeline.hpp"
#include "rcert/risk.hpp"
#include "rcert/support_set.hpp"
#include "rcert/wasserstein.hpp"

#ifndef RCERT_EXAMPLE_CONFIG
#define RCERT_EXAMPLE_CONFIG "configs/example_certify.json"
#endif

using namespace rcert;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << idx << " (" << name
            << "): " << detail << "\n";
  if (!ok) ++g_failures;
}

EmpiricalDistribution emp1d_of(const Vec& xs) {
  EmpiricalDistribution e;
  e.points = Mat(xs.size(), 1);
  e.points.data = xs;
  return e;
}

// --- criterion 1: scenario sample size ------------------------------------

void criterion1() {
  std::size_t n = scenario_sample_size(0.05, 0.05, 2, 16);
  std::ostringstream os;
  os << "scenario_sample_size(0.05, 0.05, 2, 16) = " << n << ", expected 665";
  report(1, "scenario sample size", n == 665, os.str());
}

// --- criterion 2: scenario guarantee, Monte Carlo -------------------------

void criterion2() {
  // 2-D linear Gaussian pushforward: y = W x + b with Gaussian weights
  BnnModel model;
  LayerSpec l;
  l.weight_mean = Mat(2, 2);
  l.weight_mean.at(0, 0) = 1.0;
  l.weight_mean.at(0, 1) = 0.3;
  l.weight_mean.at(1, 0) = -0.2;
  l.weight_mean.at(1, 1) = 0.8;
  l.weight_std = Mat(2, 2, 0.25);
  l.bias_mean = {0.1, -0.1};
  l.bias_std = {0.1, 0.1};
  l.activation = Activation::linear;
  model.layers.push_back(l);
  model.input_dim = 2;
  model.output_dim = 2;

  InputDistribution dist;
  dist.variant = GaussianInput{Vec{0.0, 0.0}, Vec{1.0, 1.0}};

  const double eps1 = 0.1, beta1 = 0.1;
  Template tmpl = make_template(TemplateKind::circle_uniform, 2, 8);
  std::size_t fit_n = scenario_sample_size(eps1, beta1, 2, tmpl.n_dirs());

  const int trials = 200;
  const std::size_t holdout_n = 100000;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    OutputSamples fit = collect_outputs(
        model, dist, fit_n, Rng::derive(777, "accept2_fit", t), 4);
    FittedSupport fs = fit_support(tmpl, fit, eps1, beta1);
    OutputSamples holdout = collect_outputs(
        model, dist, holdout_n, Rng::derive(777, "accept2_holdout", t), 4);
    if (violation_rate(fs, holdout) > eps1) ++failures;
  }
  double frac = static_cast<double>(failures) / trials;
  double thresh = beta1 + 3.0 * std::sqrt(beta1 * (1.0 - beta1) / trials);
  std::ostringstream os;
  os << "fit N = " << fit_n << ", failure fraction = " << frac
     << " over " << trials << " trials, threshold = " << thresh;
  report(2, "scenario guarantee", frac <= thresh, os.str());
}

// --- criterion 3: CVaR exactness on uniform samples ------------------------

void criterion3() {
  Rng rng(333);
  Vec x(100000);
  for (double& v : x) v = rng.uniform();
  bool ok = true;
  std::ostringstream os;
  for (double alpha : {0.25, 0.5, 1.0}) {
    double got = cvar_alpha(x, alpha);
    double want = 1.0 - alpha / 2.0;
    if (std::abs(got - want) > 0.01) ok = false;
    os << "alpha=" << alpha << ": " << got << " vs " << want << "; ";
  }
  report(3, "cvar of uniform samples", ok, os.str());
}

// --- criterion 4: CVaR-Wasserstein Lipschitz property ----------------------

void criterion4() {
  Rng rng(444);
  int violations = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    std::size_t n = 1 + rng.next_u64() % 32;
    Vec a(n), b(n);
    for (double& v : a) v = rng.uniform(-3.0, 3.0);
    for (double& v : b) v = rng.uniform(-3.0, 3.0);
    double w = w1_exact_1d(emp1d_of(a), emp1d_of(b));
    for (double alpha : {0.25, 0.5, 1.0}) {
      double gap = std::abs(cvar_alpha(a, alpha) - cvar_alpha(b, alpha));
      if (gap > w / alpha + 1e-9) ++violations;
    }
  }
  std::ostringstream os;
  os << violations << " violations over 1000 pairs x 3 alpha levels";
  report(4, "cvar wasserstein lipschitz", violations == 0, os.str());
}

// --- criterion 5: planner trend vs published sample sizes -------------------

void criterion5() {
  // calibrate the product L0*rho so the (alpha=1, H=0.1, beta=0.05) cell
  // plans exactly 2520 samples under the 1-D radius
  const double H = 0.1;
  const double c = H * std::sqrt(2520.0) / std::sqrt(2.0 * std::log(20.0));

  auto plan = [&](double alpha, double beta) {
    RiskSpec spec;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.half_width = H;
    spec.lipschitz = 1.0;
    spec.rho = c;
    spec.dim = 1;
    return plan_cvar_samples(spec);
  };

  bool ok = true;
  std::ostringstream os;
  std::size_t base = plan(1.0, 0.05);
  os << "calibrated base cell = " << base << " (target 2520); ";
  if (base != 2520) ok = false;

  struct Cell {
    double alpha, beta;
    double published;
  };
  const Cell cells[] = {{0.5, 0.05, 9835.0},
                        {0.25, 0.05, 38844.0},
                        {1.0, 0.01, 3808.0},
                        {0.5, 0.01, 14986.0},
                        {0.25, 0.01, 59445.0}};
  for (const Cell& cell : cells) {
    std::size_t n = plan(cell.alpha, cell.beta);
    double rel = std::abs(static_cast<double>(n) - cell.published) /
                 cell.published;
    os << "alpha=" << cell.alpha << ",beta=" << cell.beta << ": " << n
       << " vs " << cell.published << " (" << rel * 100.0 << "%); ";
    if (rel > 0.10) ok = false;
  }
  double ratio = static_cast<double>(plan(0.5, 0.05)) /
                 static_cast<double>(base);
  os << "N(0.5)/N(1) = " << ratio;
  if (ratio < 3.8 || ratio > 4.0) ok = false;
  report(5, "planner trend", ok, os.str());
}

// --- criterion 6: DRO oracle equivalence ------------------------------------

void criterion6() {
  Rng rng(666);
  const double grid_step = 0.01;
  bool ok = true;
  double worst_gap = 0.0;
  double worst_affine = 0.0;
  const double eps_choices[] = {0.0, 0.1, 1.0};

  Template box = make_template(TemplateKind::box, 2);
  OutputSamples corners;
  corners.points = Mat(2, 2);
  corners.points.at(0, 0) = -1.0;
  corners.points.at(0, 1) = -1.0;
  corners.points.at(1, 0) = 1.0;
  corners.points.at(1, 1) = 1.0;
  FittedSupport support = fit_support(box, corners, 0.05, 0.05);

  for (int inst = 0; inst < 50; ++inst) {
    std::size_t n = 1 + rng.next_u64() % 4;
    AmbiguityBall ball;
    ball.center.points = Mat(n, 2);
    for (double& v : ball.center.points.data) v = rng.uniform(-0.9, 0.9);
    ball.eps = eps_choices[inst % 3];
    ball.support = support;

    if (inst % 2 == 0) {
      // concave sup: min of 1-3 affine pieces
      MinOfAffine g;
      std::size_t pieces = 1 + rng.next_u64() % 3;
      for (std::size_t p = 0; p < pieces; ++p) {
        g.pieces.push_back(
            {{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(-1, 1)});
      }
      DroSolution sol = dro_sup_concave(g, ball, {128});
      double brute = dro_brute_force(
          [&g](const Vec& x) { return g.eval(x); }, ball, grid_step);
      double tol = std::max(1e-3, 2.0 * grid_step * g.lipschitz());
      double gap = std::abs(sol.value - brute);
      worst_gap = std::max(worst_gap, gap - tol);
      if (gap > tol) ok = false;
    } else {
      // convex inf: max of 2-3 affine pieces
      PiecewiseMaxAffine pma;
      std::size_t pieces = 2 + rng.next_u64() % 2;
      for (std::size_t p = 0; p < pieces; ++p) {
        pma.pieces.push_back(
            {{rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(-1, 1)});
      }
      PerfFn h;
      h.variant = pma;
      DroSolution sol = dro_inf_convex(h, ball, {128});
      MinOfAffine neg = MinOfAffine::negation_of(pma);
      double brute = -dro_brute_force(
          [&neg](const Vec& x) { return neg.eval(x); }, ball, grid_step);
      double tol = std::max(1e-3, 2.0 * grid_step * lipschitz_const(h));
      double gap = std::abs(sol.value - brute);
      worst_gap = std::max(worst_gap, gap - tol);
      if (gap > tol) ok = false;
    }

    // affine, no support: exact closed form
    MinOfAffine aff;
    aff.pieces = {{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                   rng.uniform(-1, 1)}};
    AmbiguityBall free_ball;
    free_ball.center = ball.center;
    free_ball.eps = ball.eps;
    double mean = aff.pieces[0].second;
    for (std::size_t k = 0; k < n; ++k) {
      mean += dot(aff.pieces[0].first, free_ball.center.points.row(k)) /
              static_cast<double>(n);
    }
    double expect = mean + free_ball.eps * norm2(aff.pieces[0].first);
    double gap = std::abs(dro_sup_concave(aff, free_ball).value - expect);
    worst_affine = std::max(worst_affine, gap);
    if (gap > 1e-9) ok = false;
  }
  std::ostringstream os;
  os << "50 instances; worst excess gap over tolerance = " << worst_gap
     << "; worst affine closed-form gap = " << worst_affine;
  report(6, "dro oracle equivalence", ok, os.str());
}

// --- criterion 7: exact Wasserstein oracles --------------------------------

void criterion7() {
  Rng rng(777);
  bool ok = true;
  double worst = 0.0;
  for (int pair = 0; pair < 500; ++pair) {
    std::size_t n = 1 + rng.next_u64() % 32;
    Vec a(n), b(n);
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    for (double& v : b) v = rng.uniform(-2.0, 2.0);
    double d1 = w1_exact_1d(emp1d_of(a), emp1d_of(b));
    double d2 = w1_exact_matching(emp1d_of(a), emp1d_of(b));
    worst = std::max(worst, std::abs(d1 - d2));
    if (std::abs(d1 - d2) > 1e-9) ok = false;
  }
  int axiom_violations = 0;
  for (int triple = 0; triple < 200; ++triple) {
    std::size_t n = 1 + rng.next_u64() % 8;
    EmpiricalDistribution e[3];
    for (auto& d : e) {
      d.points = Mat(n, 2);
      for (double& v : d.points.data) v = rng.uniform(-2.0, 2.0);
    }
    double ab = w1_exact_matching(e[0], e[1]);
    double ba = w1_exact_matching(e[1], e[0]);
    double bc = w1_exact_matching(e[1], e[2]);
    double ac = w1_exact_matching(e[0], e[2]);
    if (ab < 0.0 || std::abs(ab - ba) > 1e-9 || ac > ab + bc + 1e-9) {
      ++axiom_violations;
    }
  }
  std::ostringstream os;
  os << "worst oracle disagreement = " << worst << " over 500 pairs; "
     << axiom_violations << " axiom violations over 200 triples";
  report(7, "wasserstein oracles", ok && axiom_violations == 0, os.str());
}

// --- criterion 8: end-to-end determinism ------------------------------------

void criterion8() {
  try {
    RunConfig cfg = load_config(RCERT_EXAMPLE_CONFIG);
    auto tmp = std::filesystem::temp_directory_path();
    cfg.out_dir = (tmp / "rcert_accept8_a").string();
    nlohmann::json r1 = run_certify(cfg);
    cfg.out_dir = (tmp / "rcert_accept8_b").string();
    nlohmann::json r2 = run_certify(cfg);
    r1.erase("timing");
    r2.erase("timing");
    bool same = (r1 == r2);
    double gamma = r1["gamma_robustness"].get<double>();
    double H = cfg.risk.half_width;
    bool gamma_ok = std::abs(gamma - 2.0 * H) < 1e-12;
    std::ostringstream os;
    os << "reports " << (same ? "identical" : "DIFFER")
       << " after removing timing; gamma_robustness = " << gamma
       << ", 2H = " << 2.0 * H;
    report(8, "end-to-end determinism", same && gamma_ok, os.str());
    std::filesystem::remove_all(tmp / "rcert_accept8_a");
    std::filesystem::remove_all(tmp / "rcert_accept8_b");
  } catch (const std::exception& e) {
    report(8, "end-to-end determinism", false,
           std::string("exception: ") + e.what());
  }
}

// --- criterion 9: risk ordering and planned half-width ----------------------

void criterion9() {
  // synthesized benchmark: 1-D h-values from a known pushforward
  RiskSpec spec;
  spec.beta = 0.05;
  spec.half_width = 0.05;
  spec.lipschitz = 1.0;
  spec.rho = 1.0;  // h-values supported on [0,1]
  spec.dim = 1;

  bool ok = true;
  std::ostringstream os;

  // midpoint ordering on one fixed sample vector
  Rng rng(999);
  Vec h(20000);
  for (double& v : h) v = rng.uniform();
  double prev_mid = std::numeric_limits<double>::infinity();
  for (double alpha : {0.25, 0.5, 1.0}) {
    spec.alpha = alpha;
    Certificate c = cvar_certified_interval(h, spec);
    double mid = (c.values.at("lower") + c.values.at("upper")) / 2.0;
    os << "alpha=" << alpha << ": mid=" << mid << "; ";
    if (mid > prev_mid + 1e-12) ok = false;
    prev_mid = mid;
  }

  // each certified interval at its own planned N meets the half-width target
  for (double alpha : {0.25, 0.5, 1.0}) {
    spec.alpha = alpha;
    std::size_t planned = plan_cvar_samples(spec);
    Vec hp(planned);
    Rng rp(1000 + static_cast<std::uint64_t>(alpha * 100));
    for (double& v : hp) v = rp.uniform();
    Certificate c = cvar_certified_interval(hp, spec);
    os << "alpha=" << alpha << ": planned N=" << planned
       << ", half=" << c.values.at("half_width") << "; ";
    if (c.values.at("half_width") > spec.half_width * (1.0 + 1e-9)) ok = false;
  }
  report(9, "risk ordering and planned width", ok, os.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures == 0) {
    std::cout << "all acceptance criteria passed\n";
    return 0;
  }
  std::cout << g_failures << " acceptance criteria failed\n";
  return 1;
}
