#pragma once

#include <span>

#include "gge/benchmark/generator.hpp"
#include "gge/nn/matrix.hpp"

namespace gge::ensemble {

/// Per-type answer prior of the training set: row t is the label mass of
/// type-t instances, normalized to sum to 1. Held fixed during training.
struct DistributionBiasTable {
  nn::Matrix table;  // types x classes

  std::span<const double> row(std::size_t type_id) const { return table.row(type_id); }
  bool operator==(const DistributionBiasTable&) const = default;
};

// Throws DataError naming the first type with no label mass (no smoothing).
DistributionBiasTable fit_distribution_bias(const benchmark::Dataset& train);

}  // namespace gge::ensemble
