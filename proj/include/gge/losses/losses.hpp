#pragma once

#include <span>
#include <string_view>

#include "gge/nn/matrix.hpp"

namespace gge::losses {

enum class LossFamily { Bce, SoftmaxCe };

std::string_view family_name(LossFamily f) noexcept;

// -sum_i [y_i log sigmoid(z_i) + (1 - y_i) log(1 - sigmoid(z_i))], evaluated
// as sum_i softplus(z_i) - y_i z_i so neither log can see 0.
double bce_loss(std::span<const double> logits, std::span<const double> labels);

// -sum_i y_i log softmax(z)_i with max-subtracted softmax. Labels need not sum to 1.
double ce_loss(std::span<const double> logits, std::span<const double> labels);

double loss(LossFamily family, std::span<const double> logits, std::span<const double> labels);

// dL/dz of the selected loss: sigmoid(z) - y, or (sum_j y_j) softmax(z) - y
// (which is softmax(z) - y for a normalized label).
nn::Vector loss_grad_wrt_logits(LossFamily family, std::span<const double> logits,
                                std::span<const double> labels);

/// Pseudo-label from the negative BCE gradient at the ensemble output H:
///   clamp(2 y sigmoid(-2 y H), 0, 1)
/// Entries with y = 0 are exactly 0.
nn::Vector pseudo_label_bce(std::span<const double> labels, std::span<const double> ensemble);

/// Softmax+CE counterpart: clamp(y - p, 0, 1) where y > 0, else 0. `probs` is the
/// ensemble's probability vector.
nn::Vector pseudo_label_ce(std::span<const double> labels, std::span<const double> probs);

nn::Vector pseudo_label(LossFamily family, std::span<const double> labels,
                        std::span<const double> ensemble);

// Probability-space output of a learned branch under each family:
// elementwise sigmoid for BCE, softmax for CE.
nn::Vector branch_output(LossFamily family, std::span<const double> logits);

}  // namespace gge::losses
