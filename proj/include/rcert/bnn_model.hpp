#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcert/errors.hpp"
#include "rcert/rng.hpp"
#include "rcert/vecmat.hpp"

namespace rcert {

enum class Activation { relu, tanh, linear, softmax };

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  if (s == "softmax") return Activation::softmax;
  throw MalformedFile("unknown activation: " + s);
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

// One layer of the network: independent Gaussian posterior per weight/bias.
struct LayerSpec {
  Mat weight_mean;  // out x in
  Mat weight_std;   // out x in, entries >= 0
  Vec bias_mean;    // out
  Vec bias_std;     // out, entries >= 0
  Activation activation = Activation::linear;

  std::size_t in_dim() const { return weight_mean.cols; }
  std::size_t out_dim() const { return weight_mean.rows; }
  std::size_t param_count() const {
    return weight_mean.rows * weight_mean.cols + bias_mean.size();
  }

  void validate() const {
    if (weight_std.rows != weight_mean.rows ||
        weight_std.cols != weight_mean.cols) {
      throw ShapeMismatch("weight_std shape differs from weight_mean");
    }
    if (bias_mean.size() != weight_mean.rows ||
        bias_std.size() != weight_mean.rows) {
      throw ShapeMismatch("bias length does not match weight row count");
    }
    for (double v : weight_std.data) {
      if (v < 0.0) throw NegativeStd("negative weight_std entry");
    }
    for (double v : bias_std) {
      if (v < 0.0) throw NegativeStd("negative bias_std entry");
    }
  }
};

struct BnnModel {
  std::vector<LayerSpec> layers;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  std::size_t param_count() const {
    std::size_t p = 0;
    for (const auto& l : layers) p += l.param_count();
    return p;
  }

  void validate() const {
    if (layers.empty()) throw ShapeMismatch("model has no layers");
    for (const auto& l : layers) l.validate();
    if (layers.front().in_dim() != input_dim) {
      throw ShapeMismatch("first layer input dim does not match input_dim");
    }
    if (layers.back().out_dim() != output_dim) {
      throw ShapeMismatch("last layer output dim does not match output_dim");
    }
    for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
      if (layers[k].out_dim() != layers[k + 1].in_dim()) {
        throw ShapeMismatch("layer dimension chain broken at layer " +
                            std::to_string(k));
      }
      if (layers[k].activation == Activation::softmax) {
        throw ShapeMismatch("softmax is only permitted on the final layer");
      }
    }
  }
};

struct WeightSample {
  Vec params;  // flat, layer by layer: weights row-major, then biases
  std::uint64_t seed = 0;
};

namespace detail {

inline Mat mat_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw MalformedFile(std::string(what) + ": expected array of rows");
  }
  Mat m(j.size(), j.front().size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (!j[i].is_array() || j[i].size() != m.cols) {
      throw ShapeMismatch(std::string(what) + ": ragged rows");
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (!j[i][c].is_number()) {
        throw MalformedFile(std::string(what) + ": non-numeric entry");
      }
      m.at(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

inline Vec vec_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw MalformedFile(std::string(what) + ": expected array");
  Vec v(j.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) {
      throw MalformedFile(std::string(what) + ": non-numeric entry");
    }
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

// Model schema: {"input_dim": m, "output_dim": n, "layers": [{"weight_mean":
// [[..row..], ..], "weight_std": [[..]], "bias_mean": [..], "bias_std": [..],
// "activation": "relu"|"tanh"|"linear"|"softmax"}, ..]}. Matrices are given
// as rows (row-major); all invariants are checked eagerly.
inline BnnModel model_from_json(const nlohmann::json& j) {
  BnnModel model;
  try {
    model.input_dim = j.at("input_dim").get<std::size_t>();
    model.output_dim = j.at("output_dim").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec layer;
      layer.weight_mean = detail::mat_from_json(lj.at("weight_mean"), "weight_mean");
      layer.weight_std = detail::mat_from_json(lj.at("weight_std"), "weight_std");
      layer.bias_mean = detail::vec_from_json(lj.at("bias_mean"), "bias_mean");
      layer.bias_std = detail::vec_from_json(lj.at("bias_std"), "bias_std");
      layer.activation =
          activation_from_string(lj.at("activation").get<std::string>());
    model.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("model json: ") + e.what());
  }
  model.validate();
  return model;
}

inline nlohmann::json model_to_json(const BnnModel& model) {
  nlohmann::json j;
  j["input_dim"] = model.input_dim;
  j["output_dim"] = model.output_dim;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : model.layers) {
    nlohmann::json lj;
    auto mat_rows = [](const Mat& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < m.rows; ++i) {
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
      }
      return rows;
    };
    lj["weight_mean"] = mat_rows(l.weight_mean);
    lj["weight_std"] = mat_rows(l.weight_std);
    lj["bias_mean"] = l.bias_mean;
    lj["bias_std"] = l.bias_std;
    lj["activation"] = to_string(l.activation);
    j["layers"].push_back(std::move(lj));
  }
  return j;
}

inline BnnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("model file parse error: ") + e.what());
  }
  return model_from_json(j);
}

// Draws every parameter independently as mean + std * z.
inline WeightSample sample_weights(const BnnModel& model, Rng& rng,
                                   std::uint64_t seed_tag = 0) {
  WeightSample ws;
  ws.seed = seed_tag;
  ws.params.reserve(model.param_count());
  for (const auto& l : model.layers) {
    for (std::size_t i = 0; i < l.weight_mean.data.size(); ++i) {
      double sd = l.weight_std.data[i];
      ws.params.push_back(l.weight_mean.data[i] +
                          (sd == 0.0 ? 0.0 : sd * rng.gaussian()));
    }
    for (std::size_t i = 0; i < l.bias_mean.size(); ++i) {
      double sd = l.bias_std[i];
      ws.params.push_back(l.bias_mean[i] +
                          (sd == 0.0 ? 0.0 : sd * rng.gaussian()));
    }
  }
  return ws;
}

inline Vec forward(const BnnModel& model, const WeightSample& w, const Vec& x) {
  if (x.size() != model.input_dim) {
    throw DimensionMismatch("forward: input length does not match model");
  }
  if (w.params.size() != model.param_count()) {
    throw DimensionMismatch("forward: weight sample length does not match model");
  }
  Vec cur = x;
  std::size_t offset = 0;
  for (const auto& l : model.layers) {
    const std::size_t out = l.out_dim();
    const std::size_t in = l.in_dim();
    Vec next(out, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      double acc = 0.0;
      const double* wrow = w.params.data() + offset + i * in;
      for (std::size_t jj = 0; jj < in; ++jj) acc += wrow[jj] * cur[jj];
      next[i] = acc;
    }
    offset += out * in;
    for (std::size_t i = 0; i < out; ++i) next[i] += w.params[offset + i];
    offset += out;

    switch (l.activation) {
      case Activation::linear:
        break;
      case Activation::relu:
        for (double& v : next) v = std::max(v, 0.0);
        break;
      case Activation::tanh:
        for (double& v : next) v = std::tanh(v);
        break;
      case Activation::softmax: {
        double mx = *std::max_element(next.begin(), next.end());
        double sum = 0.0;
        for (double& v : next) {
          v = std::exp(v - mx);
          sum += v;
        }
        for (double& v : next) v /= sum;
        break;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// Stand-in for trained posteriors: reproducible Gaussian means scaled by
// weight_scale, constant stds equal to std_scale.
inline BnnModel synth_model(const std::vector<std::size_t>& arch,
                            Activation activation, double weight_scale,
                            double std_scale, std::uint64_t seed) {
  if (arch.size() < 2) throw EmptyArch("synth_model: arch needs >= 2 entries");
  if (std_scale < 0.0) throw NegativeStd("synth_model: negative std_scale");
  Rng rng(Rng::derive(seed, "synth_model", 0));
  BnnModel model;
  model.input_dim = arch.front();
  model.output_dim = arch.back();
  for (std::size_t k = 0; k + 1 < arch.size(); ++k) {
    LayerSpec l;
    const std::size_t in = arch[k];
    const std::size_t out = arch[k + 1];
    l.weight_mean = Mat(out, in);
    for (double& v : l.weight_mean.data) v = weight_scale * rng.gaussian();
    l.weight_std = Mat(out, in, std_scale);
    l.bias_mean.assign(out, 0.0);
    for (double& v : l.bias_mean) v = weight_scale * rng.gaussian();
    l.bias_std.assign(out, std_scale);
    // hidden layers get the requested activation, final layer stays linear
    // unless softmax was asked for
    l.activation = (k + 2 == arch.size())
                       ? (activation == Activation::softmax ? Activation::softmax
                                                            : Activation::linear)
                       : (activation == Activation::softmax ? Activation::relu
                                                            : activation);
    model.layers.push_back(std::move(l));
  }
  model.validate();
  return model;
}

}  // namespace rcert
