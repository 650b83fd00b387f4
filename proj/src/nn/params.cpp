#include "gge/nn/params.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include "gge/error.hpp"
#include "gge/nn/rng.hpp"

namespace gge::nn {

std::uint64_t Params::next_revision() noexcept {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void Params::add(std::string name, Linear layer) {
  touch();
  if (layer.weight.rows() != layer.bias.size()) {
    throw ShapeError("layer " + name + ": bias length does not match weight rows");
  }
  layers_.insert_or_assign(std::move(name), std::move(layer));
}

Linear& Params::at(const std::string& name) {
  touch();
  auto it = layers_.find(name);
  if (it == layers_.end()) throw ShapeError("missing layer " + name);
  return it->second;
}

const Linear& Params::at(const std::string& name) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) throw ShapeError("missing layer " + name);
  return it->second;
}

std::size_t Params::value_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, l] : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Params Params::zeros_like() const {
  Params out;
  for (const auto& [name, l] : layers_) {
    out.layers_.emplace(name, Linear{Matrix(l.weight.rows(), l.weight.cols()),
                                     Vector(l.bias.size(), 0.0)});
  }
  return out;
}

bool Params::same_shape(const Params& other) const noexcept {
  if (layers_.size() != other.layers_.size()) return false;
  auto a = layers_.begin();
  auto b = other.layers_.begin();
  for (; a != layers_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.weight.rows() != b->second.weight.rows() ||
        a->second.weight.cols() != b->second.weight.cols()) {
      return false;
    }
  }
  return true;
}

void Params::set_zero() {
  touch();
  for (auto& [_, l] : layers_) {
    l.weight.fill(0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void Params::add_scaled(const Params& other, double scale) {
  if (!same_shape(other)) throw ShapeError("add_scaled: parameter sets differ in shape");
  touch();
  auto b = other.layers_.begin();
  for (auto a = layers_.begin(); a != layers_.end(); ++a, ++b) {
    auto dst = a->second.weight.values();
    auto src = b->second.weight.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    for (std::size_t i = 0; i < a->second.bias.size(); ++i) {
      a->second.bias[i] += scale * b->second.bias[i];
    }
  }
}

bool Params::all_finite() const noexcept {
  return std::all_of(layers_.begin(), layers_.end(), [](const auto& kv) {
    return nn::all_finite(kv.second.weight.values()) && nn::all_finite(kv.second.bias);
  });
}

void for_each_value(Params& params,
                    const std::function<void(const std::string&, bool, std::size_t, double&)>& fn) {
  for (auto& [name, layer] : params) {
    auto w = layer.weight.values();
    for (std::size_t i = 0; i < w.size(); ++i) fn(name, false, i, w[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i) fn(name, true, i, layer.bias[i]);
  }
}

Params init_params(std::span<const LayerShape> layers, std::uint64_t seed) {
  Params params;
  const Rng root(derive_seed(seed, "init"));
  for (const auto& shape : layers) {
    if (shape.out == 0 || shape.in == 0) {
      throw InvalidArchitecture("layer " + shape.name + " has a zero-sized dimension (" +
                                std::to_string(shape.out) + "x" + std::to_string(shape.in) + ")");
    }
    if (params.contains(shape.name)) {
      throw InvalidArchitecture("duplicate layer name " + shape.name);
    }
    Rng rng = root.split(shape.name);
    const double a = std::sqrt(6.0 / static_cast<double>(shape.in + shape.out));
    Matrix w(shape.out, shape.in);
    for (double& v : w.values()) v = rng.uniform(-a, a);
    params.add(shape.name, Linear{std::move(w), Vector(shape.out, 0.0)});
  }
  return params;
}

std::uint64_t fingerprint(const Params& params) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= bits;
    h *= 0x100000001b3ULL;
  };
  for (const auto& [_, layer] : params) {
    for (double v : layer.weight.values()) mix(v);
    for (double v : layer.bias) mix(v);
  }
  return h;
}

}  // namespace gge::nn
