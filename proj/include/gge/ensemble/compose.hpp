#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gge/ensemble/config.hpp"
#include "gge/losses/losses.hpp"
#include "gge/nn/matrix.hpp"

namespace gge::ensemble {

// Accumulated biased-model output H at which the pseudo-label gradient is taken.
using EnsembleLogits = nn::Vector;

/// H for each ensemble variant:
///   gge-d            H = B_d
///   gge-q, gge-sf    H = f(B)
///   gge-dq, gge-d-sf H = f(B) + B_d
/// with f = sigmoid under BCE and softmax under softmax-CE. The prior row B_d
/// is already a distribution and enters unchanged. Throws ConfigError when a
/// required component is absent or the variant has no biased ensemble.
EnsembleLogits compose_ensemble(Variant variant, losses::LossFamily family,
                                std::optional<std::span<const double>> bias_row,
                                std::optional<std::span<const double>> biased_logits);

enum class Component { Distribution, Context, Self };

// Bias components ensembled ahead of the base model, in greedy order.
std::vector<Component> bias_chain(Variant v);

// Variant whose composition equals the first `n` components of v's chain,
// or nullopt for the empty prefix (H = 0).
std::optional<Variant> prefix_variant(Variant v, std::size_t n);

}  // namespace gge::ensemble
