#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppnn/dataset.hpp"
#include "ppnn/geometry.hpp"
#include "ppnn/model.hpp"

namespace ppnn::detail {

inline nlohmann::json to_json(const Window& w) {
  return nlohmann::json::array({w.x_min(), w.x_max(), w.y_min(), w.y_max()});
}

inline Window window_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw std::invalid_argument("window needs [x_min, x_max, y_min, y_max]");
  return {v[0], v[1], v[2], v[3]};
}

inline nlohmann::json to_json(const ModelSpec& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"field_resolution", m.sim.field_resolution},
          {"field_method", m.sim.field_method == FieldMethod::Cholesky ? "cholesky" : "circulant"},
          {"strauss_iterations", m.sim.strauss_iterations},
          {"lgcp_strauss_iterations", m.sim.lgcp_strauss_iterations}};
}

inline ModelSpec model_from_json(const nlohmann::json& j, ModelSpec base = {}) {
  if (j.contains("kind")) base.kind = parse_model_kind(j.at("kind").get<std::string>());
  if (j.contains("field_resolution")) base.sim.field_resolution = j.at("field_resolution").get<int>();
  if (j.contains("field_method")) {
    const auto m = j.at("field_method").get<std::string>();
    if (m != "circulant" && m != "cholesky") throw std::invalid_argument("field_method must be circulant or cholesky");
    base.sim.field_method = m == "cholesky" ? FieldMethod::Cholesky : FieldMethod::Circulant;
  }
  if (j.contains("strauss_iterations")) base.sim.strauss_iterations = j.at("strauss_iterations").get<long>();
  if (j.contains("lgcp_strauss_iterations"))
    base.sim.lgcp_strauss_iterations = j.at("lgcp_strauss_iterations").get<long>();
  return base;
}

inline nlohmann::json to_json(const std::vector<ParamRange>& ranges) {
  auto out = nlohmann::json::array();
  for (const auto& r : ranges) out.push_back({r.lo, r.hi});
  return out;
}

inline std::vector<ParamRange> ranges_from_json(const nlohmann::json& j) {
  std::vector<ParamRange> out;
  for (const auto& r : j) {
    const auto v = r.get<std::vector<double>>();
    if (v.size() != 2) throw std::invalid_argument("parameter range needs [lo, hi]");
    out.push_back({v[0], v[1]});
  }
  return out;
}

}  // namespace ppnn::detail
