#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gge/losses/losses.hpp"
#include "gge/models/base_model.hpp"

namespace gge::ensemble {

enum class Variant {
  Baseline,
  GgeD,
  GgeQ,
  GgeDQ,
  GgeSF,
  GgeDSF,
  SumDQ,
  Rubi,
  InverseSupervision,
  VisionOnly,  // baseline with the evidence-only base model
};

enum class Schedule { Iter, Tog };

std::string_view variant_name(Variant v) noexcept;
std::string_view schedule_name(Schedule s) noexcept;
// Throw ConfigError on unknown names.
Variant parse_variant(std::string_view name);
Schedule parse_schedule(std::string_view name);
losses::LossFamily parse_loss_family(std::string_view name);

const std::vector<Variant>& all_variants();

// True for variants that train a biased branch through pseudo-labels, i.e.
// the ones where iter and tog differ.
bool uses_schedule(Variant v) noexcept;

struct EnsembleConfig {
  Variant variant = Variant::Baseline;
  Schedule schedule = Schedule::Iter;
  losses::LossFamily loss_family = losses::LossFamily::Bce;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  std::size_t inverse_supervision_n = 1;
  // Swap the attention base for the evidence-only model (any variant).
  bool vision_only = false;

  models::BaseKind base_kind() const noexcept;
  // Throws ConfigError listing every problem.
  void validate() const;
};

}  // namespace gge::ensemble
