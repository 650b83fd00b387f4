#include "gge/nn/checkpoint.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "gge/error.hpp"

namespace gge::nn {

using nlohmann::json;

void save_params(const Params& params, std::ostream& out) {
  for (const auto& [name, layer] : params) {
    json rec;
    rec["name"] = name;
    rec["shape"] = {layer.weight.rows(), layer.weight.cols()};
    rec["weight"] = std::vector<double>(layer.weight.values().begin(), layer.weight.values().end());
    rec["bias"] = layer.bias;
    out << rec.dump() << '\n';
  }
}

void save_params(const Params& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  save_params(params, out);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Params load_params(std::istream& in, const std::string& source) {
  Params params;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const auto name = rec.at("name").get<std::string>();
      const auto shape = rec.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw ParseError(source, lineno, "shape must have two entries");
      auto weight = rec.at("weight").get<std::vector<double>>();
      auto bias = rec.at("bias").get<std::vector<double>>();
      if (weight.size() != shape[0] * shape[1] || bias.size() != shape[0]) {
        throw ParseError(source, lineno, "layer " + name + " values do not match its shape");
      }
      if (params.contains(name)) throw ParseError(source, lineno, "duplicate layer " + name);
      params.add(name, Linear{Matrix(shape[0], shape[1], std::move(weight)), std::move(bias)});
    } catch (const json::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return params;
}

Params load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  return load_params(in, path.string());
}

}  // namespace gge::nn
