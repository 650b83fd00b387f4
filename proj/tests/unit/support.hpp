#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "gge/models/architecture.hpp"
#include "gge/nn/params.hpp"

namespace gge::test {

inline nlohmann::json fixture(const std::string& name) {
  std::ifstream in(std::string(GGE_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return nlohmann::json::parse(in);
}

inline nn::Vector vec(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

inline nn::Matrix mat(const nlohmann::json& j) {
  nn::Matrix m(j.size(), j.empty() ? 0 : j[0].size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

// {"layer": {"weight": [[...]], "bias": [...]}, ...}
inline nn::Params params_from(const nlohmann::json& j) {
  nn::Params p;
  for (const auto& [name, layer] : j.items()) p.add(name, nn::Linear{mat(layer["weight"]), vec(layer["bias"])});
  return p;
}

inline models::Instance instance_from(const nlohmann::json& j) {
  models::Instance i;
  i.evidence = mat(j["evidence"]);
  i.context = vec(j["context"]);
  i.type_id = j["type_id"].get<std::size_t>();
  i.label = vec(j["label"]);
  i.grounding_mask = vec(j["mask"]);
  return i;
}

// Largest absolute difference between two same-shaped parameter sets.
inline double max_abs_diff(const nn::Params& a, const nn::Params& b) {
  double worst = 0.0;
  for (const auto& [name, la] : a) {
    const auto& lb = b.at(name);
    for (std::size_t r = 0; r < la.weight.rows(); ++r) {
      for (std::size_t c = 0; c < la.weight.cols(); ++c) {
        worst = std::max(worst, std::abs(la.weight(r, c) - lb.weight(r, c)));
      }
    }
    for (std::size_t k = 0; k < la.bias.size(); ++k) worst = std::max(worst, std::abs(la.bias[k] - lb.bias[k]));
  }
  return worst;
}

}  // namespace gge::test
