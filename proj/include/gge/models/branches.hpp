#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gge/models/architecture.hpp"
#include "gge/nn/params.hpp"

namespace gge::models {

struct MlpCache {
  std::uint64_t params_revision = 0;
  nn::Vector input;
  nn::Vector hidden_pre;
  nn::Vector hidden;
};

std::vector<bool> relu_pattern(const MlpCache& cache);
std::size_t exact_kinks(const MlpCache& cache);

struct BranchForward {
  nn::Vector logits;
  MlpCache cache;
};

// Context-only classifier: logits = W_o relu(W_h context). Evidence is never read.
BranchForward forward_context_branch(const nn::Params& params, const ArchitectureSpec& arch,
                                     const Instance& inst);
void backward_context_branch(const nn::Params& params, const BranchForward& fwd,
                             std::span<const double> grad_logits, nn::ParamGrads& grads,
                             nn::Vector* grad_context = nullptr);

// Linear head over a joint representation. The representation is a plain
// value here, so nothing computed from these logits can reach the base model.
BranchForward forward_self_head(const nn::Params& params, std::span<const double> joint_repr);
void backward_self_head(const nn::Params& params, const BranchForward& fwd,
                        std::span<const double> grad_logits, nn::ParamGrads& grads);

struct RubiForward {
  nn::Vector mask_logits;  // G_q
  nn::Vector mask;         // sigmoid(G_q)
  nn::Vector logits;       // c_q(G_q)
  MlpCache cache;
};

RubiForward forward_rubi_branch(const nn::Params& params, const ArchitectureSpec& arch,
                                const Instance& inst);
// grad_mask_logits is dL/dG_q from the masked base term; grad_logits is dL/dc_q(G_q).
void backward_rubi_branch(const nn::Params& params, const RubiForward& fwd,
                          std::span<const double> grad_mask_logits,
                          std::span<const double> grad_logits, nn::ParamGrads& grads);

}  // namespace gge::models
