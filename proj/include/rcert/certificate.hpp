#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rcert {

// Result record binding bound values to the guarantee parameters they were
// computed under. kind is one of: cvar_interval, perf_upper, perf_lower,
// support_set.
struct Certificate {
  std::string kind;
  std::map<std::string, double> values;
  double confidence = 0.0;
  std::map<std::string, double> guarantee;  // radii, N, alpha, beta, ...
  std::vector<std::string> warnings;
};

inline nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["kind"] = c.kind;
  j["values"] = c.values;
  j["confidence"] = c.confidence;
  j["guarantee"] = c.guarantee;
  j["warnings"] = c.warnings;
  return j;
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  Certificate c;
  c.kind = j.at("kind").get<std::string>();
  c.values = j.at("values").get<std::map<std::string, double>>();
  c.confidence = j.at("confidence").get<double>();
  c.guarantee = j.at("guarantee").get<std::map<std::string, double>>();
  c.warnings = j.at("warnings").get<std::vector<std::string>>();
  return c;
}

}  // namespace rcert
