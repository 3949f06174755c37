#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rcert/bnn_model.hpp"
#include "rcert/errors.hpp"
#include "rcert/input_space.hpp"
#include "rcert/perf_functions.hpp"
#include "rcert/rng.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

struct OutputSamples {
  Mat points;  // N x n
  std::uint64_t seed = 0;
  std::string model_id;
  std::string dist_id;

  std::size_t count() const { return points.rows; }
  std::size_t dim() const { return points.cols; }
};

struct EmpiricalDistribution {
  Mat points;  // N x d, implicit uniform weights 1/N

  std::size_t count() const { return points.rows; }
  std::size_t dim() const { return points.cols; }
};

// Output sample k uses a fresh independent (x_k, w_k) pair whose randomness
// derives from (seed, k) only, so results do not depend on the worker count.
inline OutputSamples collect_outputs(const BnnModel& model,
                                     const InputDistribution& dist,
                                     std::size_t n_samples, std::uint64_t seed,
                                     unsigned threads = 1,
                                     const std::string& model_id = "",
                                     const std::string& dist_id = "") {
  if (n_samples < 1) throw OutOfRange("collect_outputs: N must be >= 1");
  dist.validate();
  OutputSamples out;
  out.seed = seed;
  out.model_id = model_id;
  out.dist_id = dist_id;
  out.points = Mat(n_samples, model.output_dim);

  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      Rng rng_x(Rng::derive(seed, "input", k));
      Rng rng_w(Rng::derive(seed, "weights", k));
      Vec x = sample_input(dist, rng_x);
      WeightSample w = sample_weights(model, rng_w, Rng::derive(seed, "weights", k));
      Vec y = forward(model, w, x);
      auto row = out.points.row(k);
      for (std::size_t j = 0; j < y.size(); ++j) row[j] = y[j];
    }
  };

  if (threads <= 1 || n_samples < 256) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      std::size_t lo = t * chunk;
      std::size_t hi = std::min(n_samples, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

inline Vec perf_samples(const OutputSamples& samples, const PerfFn& h) {
  if (h.dim() != samples.dim()) {
    throw DimensionMismatch("perf_samples: h dimension does not match samples");
  }
  Vec v(samples.count());
  for (std::size_t k = 0; k < samples.count(); ++k) {
    v[k] = eval_h(h, samples.points.row_vec(k));
  }
  return v;
}

inline double monte_carlo_perf(const OutputSamples& samples, const PerfFn& h) {
  Vec v = perf_samples(samples, h);
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline void save_samples_csv(const OutputSamples& samples,
                             const std::string& csv_path,
                             const Vec* h_values = nullptr) {
  std::ofstream out(csv_path);
  out << std::setprecision(17);
  for (std::size_t k = 0; k < samples.count(); ++k) {
    auto row = samples.points.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << row[j];
    }
    if (h_values) out << "," << (*h_values)[k];
    out << "\n";
  }
}

inline void save_samples_meta(const OutputSamples& samples,
                              const std::string& meta_path) {
  nlohmann::json j;
  j["seed"] = samples.seed;
  j["N"] = samples.count();
  j["dim"] = samples.dim();
  j["model_id"] = samples.model_id;
  j["dist_id"] = samples.dist_id;
  std::ofstream out(meta_path);
  out << j.dump(2) << "\n";
}

inline OutputSamples load_samples_csv(const std::string& csv_path,
                                      std::size_t dim) {
  std::ifstream in(csv_path);
  if (!in) throw MalformedFile("cannot open samples file: " + csv_path);
  std::vector<double> values;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      if (cols < dim) values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols < dim) throw MalformedFile("samples row with too few columns");
    ++rows;
  }
  if (rows == 0) throw MalformedFile("samples file is empty");
  OutputSamples s;
  s.points = Mat(rows, dim);
  s.points.data = std::move(values);
  return s;
}

}  // namespace rcert
