#include "gge/losses/losses.hpp"

#include <algorithm>
#include <string>

#include "gge/error.hpp"

namespace gge::losses {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + " entries");
  }
}

}  // namespace

std::string_view family_name(LossFamily f) noexcept {
  return f == LossFamily::Bce ? "bce" : "sxce";
}

double bce_loss(std::span<const double> logits, std::span<const double> labels) {
  check_sizes(logits, labels, "bce_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    total += nn::softplus(logits[i]) - labels[i] * logits[i];
  }
  return total;
}

double ce_loss(std::span<const double> logits, std::span<const double> labels) {
  check_sizes(logits, labels, "ce_loss");
  const double lse = nn::log_sum_exp(logits);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (labels[i] != 0.0) total += labels[i] * (lse - logits[i]);
  }
  return total;
}

double loss(LossFamily family, std::span<const double> logits, std::span<const double> labels) {
  return family == LossFamily::Bce ? bce_loss(logits, labels) : ce_loss(logits, labels);
}

nn::Vector loss_grad_wrt_logits(LossFamily family, std::span<const double> logits,
                                std::span<const double> labels) {
  check_sizes(logits, labels, "loss_grad_wrt_logits");
  nn::Vector g(logits.size());
  if (family == LossFamily::Bce) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = nn::sigmoid(logits[i]) - labels[i];
    return g;
  }
  const nn::Vector p = nn::softmax(logits);
  double mass = 0.0;
  for (double y : labels) mass += y;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = mass * p[i] - labels[i];
  return g;
}

nn::Vector pseudo_label_bce(std::span<const double> labels, std::span<const double> ensemble) {
  check_sizes(labels, ensemble, "pseudo_label_bce");
  nn::Vector out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = labels[i];
    out[i] = std::clamp(2.0 * y * nn::sigmoid(-2.0 * y * ensemble[i]), 0.0, 1.0);
  }
  return out;
}

nn::Vector pseudo_label_ce(std::span<const double> labels, std::span<const double> probs) {
  check_sizes(labels, probs, "pseudo_label_ce");
  nn::Vector out(labels.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0.0) out[i] = std::clamp(labels[i] - probs[i], 0.0, 1.0);
  }
  return out;
}

nn::Vector pseudo_label(LossFamily family, std::span<const double> labels,
                        std::span<const double> ensemble) {
  return family == LossFamily::Bce ? pseudo_label_bce(labels, ensemble)
                                   : pseudo_label_ce(labels, ensemble);
}

nn::Vector branch_output(LossFamily family, std::span<const double> logits) {
  return family == LossFamily::Bce ? nn::sigmoid(logits) : nn::softmax(logits);
}

}  // namespace gge::losses
