#include "gge/models/branches.hpp"

#include <algorithm>

#include "gge/error.hpp"
#include "gge/nn/matrix.hpp"

namespace gge::models {

using nn::Vector;

namespace {

void check(const nn::Params& params, const MlpCache& cache, const char* what) {
  if (cache.params_revision != params.revision()) {
    throw CacheError(std::string(what) + " forward cache is stale");
  }
}

}  // namespace

BranchForward forward_context_branch(const nn::Params& params, const ArchitectureSpec& arch,
                                     const Instance& inst) {
  if (inst.context.size() != arch.context_dim) {
    throw ShapeError("context branch: context has " + std::to_string(inst.context.size()) +
                     " entries, architecture expects " + std::to_string(arch.context_dim));
  }
  BranchForward f;
  f.cache.params_revision = params.revision();
  f.cache.input = inst.context;
  const auto& hid = params.at("hidden");
  const auto& out = params.at("out");
  f.cache.hidden_pre = nn::linear_forward(hid.weight, hid.bias, f.cache.input);
  f.cache.hidden = nn::relu(f.cache.hidden_pre);
  f.logits = nn::linear_forward(out.weight, out.bias, f.cache.hidden);
  return f;
}

void backward_context_branch(const nn::Params& params, const BranchForward& fwd,
                             std::span<const double> grad_logits, nn::ParamGrads& grads,
                             Vector* grad_context) {
  check(params, fwd.cache, "context branch");
  const auto& hid = params.at("hidden");
  const auto& out = params.at("out");
  nn::add_outer(grads.at("out").weight, grad_logits, fwd.cache.hidden);
  nn::add_into(grads.at("out").bias, grad_logits);
  const Vector d_pre =
      nn::relu_backward(fwd.cache.hidden_pre, nn::transpose_times(out.weight, grad_logits));
  nn::add_outer(grads.at("hidden").weight, d_pre, fwd.cache.input);
  nn::add_into(grads.at("hidden").bias, d_pre);
  if (grad_context) *grad_context = nn::transpose_times(hid.weight, d_pre);
}

BranchForward forward_self_head(const nn::Params& params, std::span<const double> joint_repr) {
  BranchForward f;
  f.cache.params_revision = params.revision();
  f.cache.input.assign(joint_repr.begin(), joint_repr.end());
  const auto& out = params.at("out");
  f.logits = nn::linear_forward(out.weight, out.bias, f.cache.input);
  return f;
}

void backward_self_head(const nn::Params& params, const BranchForward& fwd,
                        std::span<const double> grad_logits, nn::ParamGrads& grads) {
  check(params, fwd.cache, "self head");
  nn::add_outer(grads.at("out").weight, grad_logits, fwd.cache.input);
  nn::add_into(grads.at("out").bias, grad_logits);
}

RubiForward forward_rubi_branch(const nn::Params& params, const ArchitectureSpec& arch,
                                const Instance& inst) {
  if (inst.context.size() != arch.context_dim) {
    throw ShapeError("rubi branch: context size mismatch");
  }
  RubiForward f;
  f.cache.params_revision = params.revision();
  f.cache.input = inst.context;
  const auto& hid = params.at("hidden");
  const auto& mask = params.at("mask");
  const auto& cls = params.at("cls");
  f.cache.hidden_pre = nn::linear_forward(hid.weight, hid.bias, f.cache.input);
  f.cache.hidden = nn::relu(f.cache.hidden_pre);
  f.mask_logits = nn::linear_forward(mask.weight, mask.bias, f.cache.hidden);
  f.mask = nn::sigmoid(f.mask_logits);
  f.logits = nn::linear_forward(cls.weight, cls.bias, f.mask_logits);
  return f;
}

void backward_rubi_branch(const nn::Params& params, const RubiForward& fwd,
                          std::span<const double> grad_mask_logits,
                          std::span<const double> grad_logits, nn::ParamGrads& grads) {
  check(params, fwd.cache, "rubi branch");
  const auto& mask = params.at("mask");
  const auto& cls = params.at("cls");
  nn::add_outer(grads.at("cls").weight, grad_logits, fwd.mask_logits);
  nn::add_into(grads.at("cls").bias, grad_logits);
  Vector d_g = nn::transpose_times(cls.weight, grad_logits);
  nn::add_into(d_g, grad_mask_logits);
  nn::add_outer(grads.at("mask").weight, d_g, fwd.cache.hidden);
  nn::add_into(grads.at("mask").bias, d_g);
  const Vector d_pre =
      nn::relu_backward(fwd.cache.hidden_pre, nn::transpose_times(mask.weight, d_g));
  nn::add_outer(grads.at("hidden").weight, d_pre, fwd.cache.input);
  nn::add_into(grads.at("hidden").bias, d_pre);
}

std::vector<bool> relu_pattern(const MlpCache& c) {
  std::vector<bool> out;
  for (double v : c.hidden_pre) out.push_back(v > 0.0);
  return out;
}

std::size_t exact_kinks(const MlpCache& c) {
  return static_cast<std::size_t>(std::count(c.hidden_pre.begin(), c.hidden_pre.end(), 0.0));
}

}  // namespace gge::models
