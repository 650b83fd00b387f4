#include "gge/ensemble/predict.hpp"

#include <algorithm>

namespace gge::ensemble {

std::vector<metrics::PredictionRecord> predict(const nn::Params& base, models::BaseKind kind,
                                               const models::ArchitectureSpec& arch,
                                               const benchmark::Dataset& data) {
  std::vector<metrics::PredictionRecord> out;
  out.reserve(data.size());
  for (const auto& inst : data.instances) {
    models::check_instance(inst, arch);
    const auto f = models::forward_base_kind(kind, base, arch, inst);
    const auto best = static_cast<std::size_t>(
        std::max_element(f.logits.begin(), f.logits.end()) - f.logits.begin());
    out.push_back({best, inst.label[best], inst.type_id, f.attention, inst.grounding_mask});
  }
  return out;
}

}  // namespace gge::ensemble
