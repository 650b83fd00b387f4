#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gge/models/architecture.hpp"
#include "gge/nn/params.hpp"

namespace gge::models {

enum class BaseKind { Attention, EvidenceOnly };

inline Network base_network(BaseKind k) noexcept {
  return k == BaseKind::Attention ? Network::Attention : Network::EvidenceOnly;
}

// Intermediate activations kept for backward. Fields that do not apply to a
// kind stay empty.
struct BaseCache {
  BaseKind kind = BaseKind::Attention;
  std::uint64_t params_revision = 0;
  nn::Matrix evidence;
  nn::Vector context;
  // attention model
  nn::Vector q_pre, q;                 // context projection
  std::vector<nn::Vector> gated;       // v_i * q
  std::vector<nn::Vector> att_pre, att_hidden;
  nn::Vector pooled;                   // sum_i alpha_i v_i (mean for evidence-only)
  nn::Vector v_pre, v_act;
  nn::Vector qf_pre, qf_act;
  // shared classifier
  nn::Vector cls_input;                // joint representation (attention) or pooled (evidence-only)
  nn::Vector cls_pre, cls_hidden;
};

struct BaseForward {
  nn::Vector logits;
  nn::Vector attention;   // nonnegative, sums to 1 (uniform for evidence-only)
  nn::Vector joint_repr;  // input to the self-ensemble head
  BaseCache cache;
};

struct InputGrads {
  nn::Matrix evidence;
  nn::Vector context;
};

// Sign (> 0) of every ReLU pre-activation in the cache, in a fixed order.
// Gradient checks use it to spot finite-difference probes that cross a kink.
std::vector<bool> relu_pattern(const BaseCache& cache);
// Pre-activations sitting exactly on the kink (== 0), where the network is
// not differentiable, e.g. every attention unit when q' is all zero.
std::size_t exact_kinks(const BaseCache& cache);

/// Attention-pooling base model:
///   q'  = relu(W_q c)
///   s_i = w . relu(W_a (v_i * q'))
///   a   = softmax(s),  v^ = sum_i a_i v_i
///   r   = relu(W_v v^) * relu(W_f c)
///   logits = W_o relu(W_h r)
BaseForward forward_base(const nn::Params& params, const ArchitectureSpec& arch,
                         const Instance& inst);

// Mean-pools the regions and applies a 2-layer head; context is never read.
// joint_repr is the head's hidden activation.
BaseForward forward_evidence_only(const nn::Params& params, const ArchitectureSpec& arch,
                                  const Instance& inst);

BaseForward forward_base_kind(BaseKind kind, const nn::Params& params,
                              const ArchitectureSpec& arch, const Instance& inst);

// Accumulates dL/dparams into `grads` for upstream dL/dlogits. Throws
// CacheError if `params` changed since the forward pass or the cache belongs
// to a different network; `inputs`, when given, receives dL/devidence and
// dL/dcontext.
void backward_base(const nn::Params& params, const BaseForward& fwd,
                   std::span<const double> grad_logits, nn::ParamGrads& grads,
                   InputGrads* inputs = nullptr);

}  // namespace gge::models
