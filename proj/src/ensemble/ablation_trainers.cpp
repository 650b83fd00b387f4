#include <algorithm>
#include <numeric>

#include "gge/error.hpp"
#include "gge/models/base_model.hpp"
#include "gge/models/branches.hpp"
#include "trainer_internal.hpp"

namespace gge::ensemble {

using detail::check_loss;
using detail::scale_in_place;
using models::Instance;

namespace {

// Vector-Jacobian product of losses::branch_output at `out` = f(z).
nn::Vector output_vjp(losses::LossFamily family, std::span<const double> out,
                      std::span<const double> grad) {
  nn::Vector g(out.size());
  if (family == losses::LossFamily::Bce) {
    for (std::size_t i = 0; i < out.size(); ++i) g[i] = grad[i] * out[i] * (1.0 - out[i]);
  } else {
    const double d = nn::dot(out, grad);
    for (std::size_t i = 0; i < out.size(); ++i) g[i] = out[i] * (grad[i] - d);
  }
  return g;
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

BranchLosses train_step_sum_dq(TrainState& s, Batch batch) {
  require(s.context && s.bias, "sum-dq needs the context branch and the distribution bias");
  if (batch.empty()) throw DataError("empty batch");
  const auto family = s.config.loss_family;
  const auto kind = s.config.base_kind();
  const double scale = 1.0 / static_cast<double>(batch.size());

  nn::ParamGrads base_grads = s.base.params.zeros_like();
  nn::ParamGrads ctx_grads = s.context->params.zeros_like();
  double total = 0.0;
  for (const Instance* inst : batch) {
    const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
    const auto qf = models::forward_context_branch(s.context->params, s.arch, *inst);
    const auto fa = losses::branch_output(family, bf.logits);
    const auto fq = losses::branch_output(family, qf.logits);
    const auto bd = s.bias->row(inst->type_id);
    nn::Vector z(bd.begin(), bd.end());
    nn::add_into(z, fq);
    nn::add_into(z, fa);
    total += losses::loss(family, z, inst->label);
    auto gz = losses::loss_grad_wrt_logits(family, z, inst->label);
    scale_in_place(gz, scale);
    models::backward_base(s.base.params, bf, output_vjp(family, fa, gz), base_grads);
    models::backward_context_branch(s.context->params, qf, output_vjp(family, fq, gz), ctx_grads);
  }
  const double mean = total * scale;
  check_loss(mean, "joint", s.batch_index);
  nn::adamax_step(s.context->opt, s.context->params, ctx_grads);
  nn::adamax_step(s.base.opt, s.base.params, base_grads);
  ++s.batch_index;
  return {{"joint", mean}};
}

BranchLosses train_step_rubi(TrainState& s, Batch batch) {
  require(s.rubi.has_value(), "rubi needs its mask branch");
  if (batch.empty()) throw DataError("empty batch");
  const auto family = s.config.loss_family;
  const auto kind = s.config.base_kind();
  const double scale = 1.0 / static_cast<double>(batch.size());

  nn::ParamGrads base_grads = s.base.params.zeros_like();
  nn::ParamGrads rubi_grads = s.rubi->params.zeros_like();
  double masked_total = 0.0;
  double question_total = 0.0;
  for (const Instance* inst : batch) {
    const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
    const auto rf = models::forward_rubi_branch(s.rubi->params, s.arch, *inst);
    const std::size_t c = bf.logits.size();

    nn::Vector masked(c);
    for (std::size_t i = 0; i < c; ++i) masked[i] = bf.logits[i] * rf.mask[i];
    masked_total += losses::loss(family, masked, inst->label);
    auto gm = losses::loss_grad_wrt_logits(family, masked, inst->label);
    scale_in_place(gm, scale);

    nn::Vector grad_base(c), grad_g(c);
    for (std::size_t i = 0; i < c; ++i) {
      grad_base[i] = gm[i] * rf.mask[i];
      grad_g[i] = gm[i] * bf.logits[i] * rf.mask[i] * (1.0 - rf.mask[i]);
    }

    question_total += losses::loss(family, rf.logits, inst->label);
    auto gq = losses::loss_grad_wrt_logits(family, rf.logits, inst->label);
    scale_in_place(gq, scale);

    models::backward_base(s.base.params, bf, grad_base, base_grads);
    models::backward_rubi_branch(s.rubi->params, rf, grad_g, gq, rubi_grads);
  }
  const double masked = masked_total * scale;
  const double question = question_total * scale;
  check_loss(masked, "masked", s.batch_index);
  check_loss(question, "question", s.batch_index);
  nn::adamax_step(s.rubi->opt, s.rubi->params, rubi_grads);
  nn::adamax_step(s.base.opt, s.base.params, base_grads);
  ++s.batch_index;
  return {{"masked", masked}, {"question", question}};
}

nn::Vector inverse_supervision_round(std::span<const double> labels,
                                     std::span<const double> probs, std::size_t n) {
  if (n == 0) throw ConfigError("inverse supervision needs N >= 1");
  if (labels.size() != probs.size()) throw ShapeError("labels and probs differ in length");
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return probs[a] != probs[b] ? probs[a] > probs[b] : a < b;
                    });
  nn::Vector out(labels.begin(), labels.end());
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = 0.0;
  return out;
}

BranchLosses train_step_inverse_supervision(TrainState& s, Batch batch) {
  if (batch.empty()) throw DataError("empty batch");
  const auto family = s.config.loss_family;
  const auto kind = s.config.base_kind();
  const double scale = 1.0 / static_cast<double>(batch.size());
  BranchLosses out;

  // Round 1: ground truth.
  {
    nn::ParamGrads grads = s.base.params.zeros_like();
    double total = 0.0;
    for (const Instance* inst : batch) {
      const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
      total += losses::loss(family, bf.logits, inst->label);
      auto g = losses::loss_grad_wrt_logits(family, bf.logits, inst->label);
      scale_in_place(g, scale);
      models::backward_base(s.base.params, bf, g, grads);
    }
    out["base"] = total * scale;
    check_loss(out["base"], "base", s.batch_index);
    nn::adamax_step(s.base.opt, s.base.params, grads);
  }

  // Round 2: labels with the model's current top-N answers removed.
  nn::ParamGrads grads = s.base.params.zeros_like();
  double total = 0.0;
  bool any = false;
  for (const Instance* inst : batch) {
    const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
    const auto probs = losses::branch_output(family, bf.logits);
    const auto reduced =
        inverse_supervision_round(inst->label, probs, s.config.inverse_supervision_n);
    if (std::none_of(reduced.begin(), reduced.end(), [](double v) { return v > 0.0; })) continue;
    any = true;
    total += losses::loss(family, bf.logits, reduced);
    auto g = losses::loss_grad_wrt_logits(family, bf.logits, reduced);
    scale_in_place(g, scale);
    models::backward_base(s.base.params, bf, g, grads);
  }
  out["round2"] = total * scale;
  check_loss(out["round2"], "round2", s.batch_index);
  if (any) nn::adamax_step(s.base.opt, s.base.params, grads);
  ++s.batch_index;
  return out;
}

RunRecord train_sum_dq(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                       const benchmark::Dataset& data) {
  if (config.variant != Variant::SumDQ) throw ConfigError("train_sum_dq needs variant sum-dq");
  return detail::run_training(config, arch, data, {});
}

RunRecord train_rubi(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                     const benchmark::Dataset& data) {
  if (config.variant != Variant::Rubi) throw ConfigError("train_rubi needs variant rubi");
  return detail::run_training(config, arch, data, {});
}

}  // namespace gge::ensemble
