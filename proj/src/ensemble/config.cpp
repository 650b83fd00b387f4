#include "gge/ensemble/config.hpp"

#include <cmath>

#include "gge/error.hpp"

namespace gge::ensemble {

namespace {

struct VariantName {
  Variant v;
  std::string_view name;
};

constexpr VariantName kVariants[] = {
    {Variant::Baseline, "baseline"},
    {Variant::GgeD, "gge-d"},
    {Variant::GgeQ, "gge-q"},
    {Variant::GgeDQ, "gge-dq"},
    {Variant::GgeSF, "gge-sf"},
    {Variant::GgeDSF, "gge-d-sf"},
    {Variant::SumDQ, "sum-dq"},
    {Variant::Rubi, "rubi"},
    {Variant::InverseSupervision, "inverse-supervision"},
    {Variant::VisionOnly, "vision-only"},
};

}  // namespace

std::string_view variant_name(Variant v) noexcept {
  for (const auto& e : kVariants) {
    if (e.v == v) return e.name;
  }
  return "?";
}

std::string_view schedule_name(Schedule s) noexcept { return s == Schedule::Iter ? "iter" : "tog"; }

Variant parse_variant(std::string_view name) {
  for (const auto& e : kVariants) {
    if (e.name == name) return e.v;
  }
  std::string known;
  for (const auto& e : kVariants) known += std::string(known.empty() ? "" : ", ") + std::string(e.name);
  throw ConfigError("unknown variant '" + std::string(name) + "' (known: " + known + ")");
}

Schedule parse_schedule(std::string_view name) {
  if (name == "iter") return Schedule::Iter;
  if (name == "tog") return Schedule::Tog;
  throw ConfigError("unknown schedule '" + std::string(name) + "' (known: iter, tog)");
}

losses::LossFamily parse_loss_family(std::string_view name) {
  if (name == "bce") return losses::LossFamily::Bce;
  if (name == "sxce") return losses::LossFamily::SoftmaxCe;
  throw ConfigError("unknown loss family '" + std::string(name) + "' (known: bce, sxce)");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = [] {
    std::vector<Variant> out;
    for (const auto& e : kVariants) out.push_back(e.v);
    return out;
  }();
  return v;
}

bool uses_schedule(Variant v) noexcept {
  return v == Variant::GgeQ || v == Variant::GgeDQ || v == Variant::GgeSF || v == Variant::GgeDSF;
}

models::BaseKind EnsembleConfig::base_kind() const noexcept {
  return (vision_only || variant == Variant::VisionOnly) ? models::BaseKind::EvidenceOnly
                                                         : models::BaseKind::Attention;
}

void EnsembleConfig::validate() const {
  std::string issues;
  const auto add = [&issues](const std::string& s) { issues += "\n  - " + s; };
  if (batch_size < 1) add("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) add("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) add("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) add("beta2 must lie in [0, 1)");
  if (inverse_supervision_n < 1) add("inverse_supervision_n must be >= 1");
  if (!issues.empty()) throw ConfigError("invalid training config:" + issues);
}

}  // namespace gge::ensemble
