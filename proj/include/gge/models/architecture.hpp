#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gge/nn/matrix.hpp"
#include "gge/nn/params.hpp"

namespace gge::models {

/// Named integer dimensions shared by every network in a run.
struct ArchitectureSpec {
  std::size_t regions = 8;        // n_v
  std::size_t evidence_dim = 16;  // d_v
  std::size_t context_dim = 16;   // d_q
  std::size_t hidden = 32;
  std::size_t classes = 20;       // C

  // Throws InvalidArchitecture naming every zero dimension.
  void validate() const;

  bool operator==(const ArchitectureSpec&) const = default;
};

enum class Network {
  Attention,      // attention-pooling base model
  EvidenceOnly,   // mean-pooled regions + 2-layer head
  ContextBranch,  // context-only 2-layer classifier
  SelfHead,       // linear classifier on the detached joint representation
  RubiBranch,     // RUBi mask network g plus its classifier c_q
};

std::string_view network_name(Network n) noexcept;

std::vector<nn::LayerShape> layer_shapes(Network n, const ArchitectureSpec& arch);

nn::Params init_network(Network n, const ArchitectureSpec& arch, std::uint64_t seed);

/// One sample: a set of region vectors, a context vector, a type id, a soft
/// label over the C answers and a per-region relevance mask (evaluation only).
struct Instance {
  nn::Matrix evidence;  // regions x evidence_dim
  nn::Vector context;   // context_dim
  std::size_t type_id = 0;
  nn::Vector label;           // classes, entries in [0, 1]
  nn::Vector grounding_mask;  // regions, entries in [0, 1]

  bool operator==(const Instance&) const = default;
};

// Throws ShapeError if the instance does not fit `arch`.
void check_instance(const Instance& inst, const ArchitectureSpec& arch);

}  // namespace gge::models
