#include "gge/ensemble/compose.hpp"

#include "gge/error.hpp"

namespace gge::ensemble {

EnsembleLogits compose_ensemble(Variant variant, losses::LossFamily family,
                                std::optional<std::span<const double>> bias_row,
                                std::optional<std::span<const double>> biased_logits) {
  bool need_bias = false;
  bool need_logits = false;
  switch (variant) {
    case Variant::GgeD: need_bias = true; break;
    case Variant::GgeQ:
    case Variant::GgeSF: need_logits = true; break;
    case Variant::GgeDQ:
    case Variant::GgeDSF: need_bias = need_logits = true; break;
    default:
      throw ConfigError("variant " + std::string(variant_name(variant)) +
                        " has no greedy ensemble to compose");
  }
  if (need_bias && !bias_row) {
    throw ConfigError(std::string(variant_name(variant)) + " needs the distribution-bias row");
  }
  if (need_logits && !biased_logits) {
    throw ConfigError(std::string(variant_name(variant)) + " needs biased-branch logits");
  }

  EnsembleLogits h;
  if (need_logits) {
    h = losses::branch_output(family, *biased_logits);
  }
  if (need_bias) {
    if (h.empty()) {
      h.assign(bias_row->begin(), bias_row->end());
    } else {
      nn::add_into(h, *bias_row);
    }
  }
  return h;
}

std::vector<Component> bias_chain(Variant v) {
  switch (v) {
    case Variant::GgeD: return {Component::Distribution};
    case Variant::GgeQ: return {Component::Context};
    case Variant::GgeDQ: return {Component::Distribution, Component::Context};
    case Variant::GgeSF: return {Component::Self};
    case Variant::GgeDSF: return {Component::Distribution, Component::Self};
    default: return {};
  }
}

std::optional<Variant> prefix_variant(Variant v, std::size_t n) {
  const auto chain = bias_chain(v);
  if (n > chain.size()) throw ConfigError("prefix longer than the bias chain");
  bool dist = false;
  std::optional<Component> learned;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain[i] == Component::Distribution) {
      dist = true;
    } else {
      learned = chain[i];
    }
  }
  if (!dist && !learned) return std::nullopt;
  if (!learned) return Variant::GgeD;
  if (*learned == Component::Context) return dist ? Variant::GgeDQ : Variant::GgeQ;
  return dist ? Variant::GgeDSF : Variant::GgeSF;
}

}  // namespace gge::ensemble
