#include "gge/ensemble/distribution_bias.hpp"

#include <numeric>

#include "gge/error.hpp"

namespace gge::ensemble {

DistributionBiasTable fit_distribution_bias(const benchmark::Dataset& train) {
  if (train.empty()) throw DataError("cannot fit distribution bias on an empty dataset");
  // Shares the accumulate-and-normalize rule of summarize_priors.
  DistributionBiasTable out{benchmark::summarize_priors(train)};
  for (std::size_t t = 0; t < out.table.rows(); ++t) {
    const auto row = out.table.row(t);
    if (std::accumulate(row.begin(), row.end(), 0.0) == 0.0) {
      throw DataError("type " + std::to_string(t) + " has no labelled instances in the train set");
    }
  }
  return out;
}

}  // namespace gge::ensemble
