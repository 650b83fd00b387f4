#include "gge/models/architecture.hpp"

#include <string>

#include "gge/error.hpp"

namespace gge::models {

void ArchitectureSpec::validate() const {
  std::string bad;
  const auto check = [&bad](std::size_t v, const char* name) {
    if (v == 0) bad += std::string(bad.empty() ? "" : ", ") + name;
  };
  check(regions, "regions");
  check(evidence_dim, "evidence_dim");
  check(context_dim, "context_dim");
  check(hidden, "hidden");
  check(classes, "classes");
  if (!bad.empty()) throw InvalidArchitecture("zero-sized dimension(s): " + bad);
}

std::string_view network_name(Network n) noexcept {
  switch (n) {
    case Network::Attention: return "base";
    case Network::EvidenceOnly: return "evidence-only";
    case Network::ContextBranch: return "context";
    case Network::SelfHead: return "self";
    case Network::RubiBranch: return "rubi";
  }
  return "?";
}

std::vector<nn::LayerShape> layer_shapes(Network n, const ArchitectureSpec& a) {
  switch (n) {
    case Network::Attention:
      return {
          {"q_proj", a.evidence_dim, a.context_dim},
          {"att_hidden", a.hidden, a.evidence_dim},
          {"att_score", 1, a.hidden},
          {"v_proj", a.hidden, a.evidence_dim},
          {"q_fuse", a.hidden, a.context_dim},
          {"cls_hidden", a.hidden, a.hidden},
          {"cls_out", a.classes, a.hidden},
      };
    case Network::EvidenceOnly:
      return {{"hidden", a.hidden, a.evidence_dim}, {"out", a.classes, a.hidden}};
    case Network::ContextBranch:
      return {{"hidden", a.hidden, a.context_dim}, {"out", a.classes, a.hidden}};
    case Network::SelfHead:
      return {{"out", a.classes, a.hidden}};
    case Network::RubiBranch:
      return {{"hidden", a.hidden, a.context_dim},
              {"mask", a.classes, a.hidden},
              {"cls", a.classes, a.classes}};
  }
  return {};
}

nn::Params init_network(Network n, const ArchitectureSpec& arch, std::uint64_t seed) {
  arch.validate();
  const auto shapes = layer_shapes(n, arch);
  return nn::init_params(shapes, seed);
}

void check_instance(const Instance& inst, const ArchitectureSpec& arch) {
  if (inst.evidence.rows() != arch.regions || inst.evidence.cols() != arch.evidence_dim) {
    throw ShapeError("instance evidence is " + std::to_string(inst.evidence.rows()) + "x" +
                     std::to_string(inst.evidence.cols()) + ", architecture expects " +
                     std::to_string(arch.regions) + "x" + std::to_string(arch.evidence_dim));
  }
  if (inst.context.size() != arch.context_dim) {
    throw ShapeError("instance context has " + std::to_string(inst.context.size()) +
                     " entries, architecture expects " + std::to_string(arch.context_dim));
  }
  if (inst.label.size() != arch.classes) {
    throw ShapeError("instance label has " + std::to_string(inst.label.size()) +
                     " entries, architecture expects " + std::to_string(arch.classes));
  }
  if (inst.grounding_mask.size() != arch.regions) {
    throw ShapeError("instance grounding mask has " + std::to_string(inst.grounding_mask.size()) +
                     " entries, architecture expects " + std::to_string(arch.regions));
  }
}

}  // namespace gge::models
