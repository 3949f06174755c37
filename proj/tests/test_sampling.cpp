#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rcert/bnn_model.hpp"
#include "rcert/input_space.hpp"
#include "rcert/risk.hpp"
#include "rcert/sampling.hpp"

using namespace rcert;

namespace {

// y = w * x with w ~ N(mean, std), single scalar layer
BnnModel scalar_model(double w_mean, double w_std) {
  BnnModel m;
  LayerSpec l;
  l.weight_mean = Mat(1, 1, w_mean);
  l.weight_std = Mat(1, 1, w_std);
  l.bias_mean = {0.0};
  l.bias_std = {0.0};
  l.activation = Activation::linear;
  m.layers.push_back(l);
  m.input_dim = 1;
  m.output_dim = 1;
  return m;
}

}  // namespace

TEST_CASE("point mass input and zero-std model give identical rows") {
  BnnModel m = scalar_model(2.0, 0.0);
  InputDistribution d;
  d.variant = PointMass{{1.5}};
  OutputSamples s = collect_outputs(m, d, 5, 42);
  REQUIRE(s.count() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    REQUIRE(s.points.at(k, 0) == Catch::Approx(3.0));
  }
}

TEST_CASE("same seed gives identical samples") {
  BnnModel m = scalar_model(0.0, 1.0);
  InputDistribution d;
  d.variant = UniformBox{Vec{0.0}, 1.0};
  OutputSamples a = collect_outputs(m, d, 100, 7);
  OutputSamples b = collect_outputs(m, d, 100, 7);
  REQUIRE(a.points.data == b.points.data);
}

TEST_CASE("samples are independent of the worker count") {
  BnnModel m = scalar_model(0.0, 1.0);
  InputDistribution d;
  d.variant = GaussianInput{Vec{0.0}, Vec{1.0}};
  OutputSamples a = collect_outputs(m, d, 1000, 11, 1);
  OutputSamples b = collect_outputs(m, d, 1000, 11, 4);
  OutputSamples c = collect_outputs(m, d, 1000, 11, 7);
  REQUIRE(a.points.data == b.points.data);
  REQUIRE(a.points.data == c.points.data);
}

TEST_CASE("standard-normal pushforward moments") {
  // y = w * 1, w ~ N(0,1)
  BnnModel m = scalar_model(0.0, 1.0);
  InputDistribution d;
  d.variant = PointMass{{1.0}};
  OutputSamples s = collect_outputs(m, d, 100000, 13);
  double sum = 0.0, sum2 = 0.0;
  for (double v : s.points.data) {
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / 100000.0;
  double sd = std::sqrt(sum2 / 100000.0 - mean * mean);
  REQUIRE(std::abs(mean) < 0.02);
  REQUIRE(std::abs(sd - 1.0) < 0.02);
}

TEST_CASE("split halves have close empirical means") {
  BnnModel m = scalar_model(0.0, 1.0);
  InputDistribution d;
  d.variant = PointMass{{1.0}};
  const std::size_t M = 20000;
  OutputSamples s = collect_outputs(m, d, 2 * M, 17);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < M; ++k) m1 += s.points.at(k, 0);
  for (std::size_t k = M; k < 2 * M; ++k) m2 += s.points.at(k, 0);
  m1 /= static_cast<double>(M);
  m2 /= static_cast<double>(M);
  // O(M^{-1/2}) scale: allow 5 standard errors of the difference
  REQUIRE(std::abs(m1 - m2) < 5.0 * std::sqrt(2.0 / static_cast<double>(M)));
}

TEST_CASE("perf_samples applies h componentwise") {
  OutputSamples s;
  SECTION("one minus y") {
    s.points = Mat(2, 1);
    s.points.at(0, 0) = 0.2;
    s.points.at(1, 0) = 0.9;
    PerfFn h;
    h.variant = OneMinusY{};
    Vec v = perf_samples(s, h);
    REQUIRE(v[0] == Catch::Approx(0.8));
    REQUIRE(v[1] == Catch::Approx(0.1));
  }
  SECTION("affine") {
    s.points = Mat(2, 2);
    s.points.at(0, 0) = 1.0;
    s.points.at(0, 1) = 2.0;
    PerfFn h;
    h.variant = AffinePerf{{1.0, 1.0}, 0.0};
    Vec v = perf_samples(s, h);
    REQUIRE(v[0] == Catch::Approx(3.0));
    REQUIRE(v[1] == Catch::Approx(0.0));
  }
  SECTION("dimension mismatch") {
    s.points = Mat(1, 2);
    PerfFn h;
    h.variant = OneMinusY{};
    REQUIRE_THROWS_AS(perf_samples(s, h), DimensionMismatch);
  }
}

TEST_CASE("margin on softmax outputs matches hand evaluation") {
  BnnModel m;
  LayerSpec l;
  l.weight_mean = Mat(3, 2);
  l.weight_mean.at(0, 0) = 1.0;
  l.weight_mean.at(1, 1) = 1.0;
  l.weight_mean.at(2, 0) = -1.0;
  l.weight_std = Mat(3, 2, 0.0);
  l.bias_mean = {0.0, 0.1, -0.2};
  l.bias_std = {0.0, 0.0, 0.0};
  l.activation = Activation::softmax;
  m.layers.push_back(l);
  m.input_dim = 2;
  m.output_dim = 3;

  InputDistribution d;
  d.variant = PointMass{{0.4, -0.3}};
  OutputSamples s = collect_outputs(m, d, 1, 0);

  PerfFn h;
  h.variant = Margin{0, 3};
  double got = perf_samples(s, h)[0];

  // independent hand evaluation of the softmax margin
  double z0 = 0.4, z1 = -0.3 + 0.1, z2 = -0.4 - 0.2;
  double e0 = std::exp(z0), e1 = std::exp(z1), e2 = std::exp(z2);
  double tot = e0 + e1 + e2;
  double expected = std::max(e1, e2) / tot - e0 / tot;
  REQUIRE(got == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("monte_carlo_perf equals the mean of perf samples") {
  OutputSamples s;
  s.points = Mat(4, 1);
  s.points.at(0, 0) = 0.0;  // h values 1,2,3,4 via h(y) = 1 - y
  s.points.at(1, 0) = -1.0;
  s.points.at(2, 0) = -2.0;
  s.points.at(3, 0) = -3.0;
  PerfFn h;
  h.variant = OneMinusY{};
  REQUIRE(monte_carlo_perf(s, h) == Catch::Approx(2.5));

  // cross-module identity with CVaR at alpha = 1
  Vec hv = perf_samples(s, h);
  REQUIRE(monte_carlo_perf(s, h) == Catch::Approx(cvar_alpha(hv, 1.0)));

  OutputSamples c;
  c.points = Mat(3, 1, 0.3);
  REQUIRE(monte_carlo_perf(c, h) == Catch::Approx(0.7));
}

TEST_CASE("csv round trip preserves samples") {
  BnnModel m = scalar_model(0.0, 1.0);
  InputDistribution d;
  d.variant = PointMass{{1.0}};
  OutputSamples s = collect_outputs(m, d, 50, 23, 1, "model-x", "dist-y");

  auto dir = std::filesystem::temp_directory_path() / "rcert_sampling_test";
  std::filesystem::create_directories(dir);
  std::string csv = (dir / "samples.csv").string();
  PerfFn h;
  h.variant = OneMinusY{};
  Vec hv = perf_samples(s, h);
  save_samples_csv(s, csv, &hv);
  save_samples_meta(s, (dir / "samples.meta.json").string());

  OutputSamples back = load_samples_csv(csv, 1);
  REQUIRE(back.count() == 50);
  for (std::size_t k = 0; k < 50; ++k) {
    REQUIRE(back.points.at(k, 0) == s.points.at(k, 0));
  }
  std::filesystem::remove_all(dir);
}
