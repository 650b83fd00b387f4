#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gge/nn/matrix.hpp"

namespace gge::nn {

/// Declared shape of one dense layer: weight is out x in, bias has length out.
struct LayerShape {
  std::string name;
  std::size_t out = 0;
  std::size_t in = 0;
};

struct Linear {
  Matrix weight;
  Vector bias;

  bool operator==(const Linear&) const = default;
};

/// Named dense layers of one network, ordered by name.
class Params {
 public:
  using Map = std::map<std::string, Linear>;

  Params() : revision_(next_revision()) {}

  void add(std::string name, Linear layer);
  bool contains(const std::string& name) const { return layers_.count(name) != 0; }
  // Throws ShapeError when the layer is absent.
  Linear& at(const std::string& name);
  const Linear& at(const std::string& name) const;

  Map::iterator begin() {
    touch();
    return layers_.begin();
  }
  Map::iterator end() { return layers_.end(); }
  Map::const_iterator begin() const { return layers_.begin(); }
  Map::const_iterator end() const { return layers_.end(); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t value_count() const noexcept;

  // Same layers and shapes, every value zero.
  Params zeros_like() const;
  bool same_shape(const Params& other) const noexcept;
  void set_zero();
  // this += scale * other; shapes must match.
  void add_scaled(const Params& other, double scale);
  bool all_finite() const noexcept;

  bool operator==(const Params& other) const { return layers_ == other.layers_; }

  // Changes on every mutable access; copies share it until one of them is
  // touched. Forward caches record it to detect stale parameters cheaply.
  std::uint64_t revision() const noexcept { return revision_; }

 private:
  static std::uint64_t next_revision() noexcept;
  void touch() noexcept { revision_ = next_revision(); }

  Map layers_;
  std::uint64_t revision_;
};

using ParamGrads = Params;

// Visits every scalar of every layer in a fixed order: layers by name, weight
// entries row-major, then bias entries.
void for_each_value(Params& params,
                    const std::function<void(const std::string& layer, bool is_bias,
                                             std::size_t index, double& value)>& fn);

// Weights ~ U(-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases zero. Each
// layer draws from a stream keyed by (seed, layer name). Throws
// InvalidArchitecture on a zero-sized dimension or duplicate name.
Params init_params(std::span<const LayerShape> layers, std::uint64_t seed);

// FNV-1a over every value's bit pattern, in visitation order. Compares
// parameter sets by value; revision() is what guards the forward caches.
std::uint64_t fingerprint(const Params& params) noexcept;

}  // namespace gge::nn
