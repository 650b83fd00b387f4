#pragma once

#include <vector>

#include "gge/benchmark/generator.hpp"
#include "gge/metrics/metrics.hpp"
#include "gge/models/base_model.hpp"

namespace gge::ensemble {

// Runs the base model alone over `data`. The predicted answer is the logit
// argmax (lowest index on ties) and its score is the label mass there.
std::vector<metrics::PredictionRecord> predict(const nn::Params& base, models::BaseKind kind,
                                               const models::ArchitectureSpec& arch,
                                               const benchmark::Dataset& data);

}  // namespace gge::ensemble
