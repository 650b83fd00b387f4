#include "gge/models/base_model.hpp"

#include <algorithm>

#include "gge/error.hpp"
#include "gge/nn/matrix.hpp"

namespace gge::models {

using nn::Matrix;
using nn::Vector;

namespace {

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void classifier_forward(const nn::Params& p, BaseCache& c, Vector& logits) {
  const auto& hid = p.at("cls_hidden");
  const auto& out = p.at("cls_out");
  c.cls_pre = nn::linear_forward(hid.weight, hid.bias, c.cls_input);
  c.cls_hidden = nn::relu(c.cls_pre);
  logits = nn::linear_forward(out.weight, out.bias, c.cls_hidden);
}

void check_cache(const nn::Params& params, const BaseForward& fwd, std::size_t classes) {
  if (fwd.cache.params_revision != params.revision()) {
    throw CacheError("base forward cache is stale: parameters changed since the forward pass");
  }
  const bool attention_params = params.contains("q_proj");
  if (attention_params != (fwd.cache.kind == BaseKind::Attention)) {
    throw CacheError("base forward cache was produced by a different network");
  }
  if (classes != fwd.logits.size()) {
    throw ShapeError("grad_logits has " + std::to_string(classes) + " entries, logits have " +
                     std::to_string(fwd.logits.size()));
  }
}

}  // namespace

BaseForward forward_base(const nn::Params& params, const ArchitectureSpec& arch,
                         const Instance& inst) {
  check_instance(inst, arch);
  BaseForward f;
  BaseCache& c = f.cache;
  c.kind = BaseKind::Attention;
  c.params_revision = params.revision();
  c.evidence = inst.evidence;
  c.context = inst.context;

  const auto& qp = params.at("q_proj");
  const auto& ah = params.at("att_hidden");
  const auto& as = params.at("att_score");
  const auto& vp = params.at("v_proj");
  const auto& qf = params.at("q_fuse");

  c.q_pre = nn::linear_forward(qp.weight, qp.bias, inst.context);
  c.q = nn::relu(c.q_pre);

  const std::size_t n = inst.evidence.rows();
  c.gated.resize(n);
  c.att_pre.resize(n);
  c.att_hidden.resize(n);
  Vector scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.gated[i] = hadamard(inst.evidence.row(i), c.q);
    c.att_pre[i] = nn::linear_forward(ah.weight, ah.bias, c.gated[i]);
    c.att_hidden[i] = nn::relu(c.att_pre[i]);
    scores[i] = nn::linear_forward(as.weight, as.bias, c.att_hidden[i])[0];
  }
  f.attention = nn::softmax(scores);

  c.pooled.assign(inst.evidence.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = inst.evidence.row(i);
    for (std::size_t d = 0; d < v.size(); ++d) c.pooled[d] += f.attention[i] * v[d];
  }

  c.v_pre = nn::linear_forward(vp.weight, vp.bias, c.pooled);
  c.v_act = nn::relu(c.v_pre);
  c.qf_pre = nn::linear_forward(qf.weight, qf.bias, inst.context);
  c.qf_act = nn::relu(c.qf_pre);
  c.cls_input = hadamard(c.v_act, c.qf_act);
  f.joint_repr = c.cls_input;

  classifier_forward(params, c, f.logits);
  return f;
}

BaseForward forward_evidence_only(const nn::Params& params, const ArchitectureSpec& arch,
                                  const Instance& inst) {
  check_instance(inst, arch);
  BaseForward f;
  BaseCache& c = f.cache;
  c.kind = BaseKind::EvidenceOnly;
  c.params_revision = params.revision();
  c.evidence = inst.evidence;

  const std::size_t n = inst.evidence.rows();
  f.attention.assign(n, 1.0 / static_cast<double>(n));
  c.pooled.assign(inst.evidence.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = inst.evidence.row(i);
    for (std::size_t d = 0; d < v.size(); ++d) c.pooled[d] += v[d];
  }
  for (double& v : c.pooled) v /= static_cast<double>(n);

  const auto& hid = params.at("hidden");
  const auto& out = params.at("out");
  c.cls_input = c.pooled;
  c.cls_pre = nn::linear_forward(hid.weight, hid.bias, c.cls_input);
  c.cls_hidden = nn::relu(c.cls_pre);
  f.logits = nn::linear_forward(out.weight, out.bias, c.cls_hidden);
  f.joint_repr = c.cls_hidden;
  return f;
}

BaseForward forward_base_kind(BaseKind kind, const nn::Params& params,
                              const ArchitectureSpec& arch, const Instance& inst) {
  return kind == BaseKind::Attention ? forward_base(params, arch, inst)
                                     : forward_evidence_only(params, arch, inst);
}

void backward_base(const nn::Params& params, const BaseForward& fwd,
                   std::span<const double> grad_logits, nn::ParamGrads& grads,
                   InputGrads* inputs) {
  check_cache(params, fwd, grad_logits.size());
  const BaseCache& c = fwd.cache;
  const std::size_t n = c.evidence.rows();

  if (c.kind == BaseKind::EvidenceOnly) {
    const auto& out = params.at("out");
    const auto& hid = params.at("hidden");
    auto& g_out = grads.at("out");
    auto& g_hid = grads.at("hidden");
    nn::add_outer(g_out.weight, grad_logits, c.cls_hidden);
    nn::add_into(g_out.bias, grad_logits);
    const Vector d_hidden = nn::relu_backward(c.cls_pre, nn::transpose_times(out.weight, grad_logits));
    nn::add_outer(g_hid.weight, d_hidden, c.cls_input);
    nn::add_into(g_hid.bias, d_hidden);
    if (inputs) {
      const Vector d_pooled = nn::transpose_times(hid.weight, d_hidden);
      inputs->evidence = Matrix(n, c.evidence.cols());
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < d_pooled.size(); ++d) {
          inputs->evidence(i, d) = d_pooled[d] / static_cast<double>(n);
        }
      }
      inputs->context.assign(c.context.size(), 0.0);
    }
    return;
  }

  const auto& qp = params.at("q_proj");
  const auto& ah = params.at("att_hidden");
  const auto& as = params.at("att_score");
  const auto& vp = params.at("v_proj");
  const auto& qf = params.at("q_fuse");
  const auto& ch = params.at("cls_hidden");
  const auto& co = params.at("cls_out");

  // classifier
  nn::add_outer(grads.at("cls_out").weight, grad_logits, c.cls_hidden);
  nn::add_into(grads.at("cls_out").bias, grad_logits);
  const Vector d_cls_pre = nn::relu_backward(c.cls_pre, nn::transpose_times(co.weight, grad_logits));
  nn::add_outer(grads.at("cls_hidden").weight, d_cls_pre, c.cls_input);
  nn::add_into(grads.at("cls_hidden").bias, d_cls_pre);
  const Vector d_joint = nn::transpose_times(ch.weight, d_cls_pre);

  // fusion r = v_act * qf_act
  const Vector d_v_pre = nn::relu_backward(c.v_pre, hadamard(d_joint, c.qf_act));
  const Vector d_qf_pre = nn::relu_backward(c.qf_pre, hadamard(d_joint, c.v_act));
  nn::add_outer(grads.at("v_proj").weight, d_v_pre, c.pooled);
  nn::add_into(grads.at("v_proj").bias, d_v_pre);
  nn::add_outer(grads.at("q_fuse").weight, d_qf_pre, c.context);
  nn::add_into(grads.at("q_fuse").bias, d_qf_pre);
  Vector d_context = nn::transpose_times(qf.weight, d_qf_pre);
  const Vector d_pooled = nn::transpose_times(vp.weight, d_v_pre);

  // pooling v^ = sum_i a_i v_i
  Matrix d_evidence(n, c.evidence.cols());
  Vector d_alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = c.evidence.row(i);
    d_alpha[i] = nn::dot(d_pooled, v);
    for (std::size_t d = 0; d < v.size(); ++d) d_evidence(i, d) += fwd.attention[i] * d_pooled[d];
  }
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) weighted += fwd.attention[i] * d_alpha[i];

  // softmax and the per-region scoring MLP
  auto& g_as = grads.at("att_score");
  auto& g_ah = grads.at("att_hidden");
  Vector d_q(c.q.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d_score = fwd.attention[i] * (d_alpha[i] - weighted);
    if (d_score == 0.0) continue;
    const double ds[1] = {d_score};
    nn::add_outer(g_as.weight, ds, c.att_hidden[i]);
    g_as.bias[0] += d_score;
    const Vector d_att_pre = nn::relu_backward(c.att_pre[i], nn::transpose_times(as.weight, ds));
    nn::add_outer(g_ah.weight, d_att_pre, c.gated[i]);
    nn::add_into(g_ah.bias, d_att_pre);
    const Vector d_gated = nn::transpose_times(ah.weight, d_att_pre);
    const auto v = c.evidence.row(i);
    for (std::size_t d = 0; d < v.size(); ++d) {
      d_evidence(i, d) += d_gated[d] * c.q[d];
      d_q[d] += d_gated[d] * v[d];
    }
  }

  const Vector d_q_pre = nn::relu_backward(c.q_pre, d_q);
  nn::add_outer(grads.at("q_proj").weight, d_q_pre, c.context);
  nn::add_into(grads.at("q_proj").bias, d_q_pre);

  if (inputs) {
    nn::add_into(d_context, nn::transpose_times(qp.weight, d_q_pre));
    inputs->evidence = std::move(d_evidence);
    inputs->context = std::move(d_context);
  }
}

std::vector<bool> relu_pattern(const BaseCache& c) {
  std::vector<bool> out;
  const auto push = [&out](std::span<const double> pre) {
    for (double v : pre) out.push_back(v > 0.0);
  };
  push(c.q_pre);
  for (const auto& a : c.att_pre) push(a);
  push(c.v_pre);
  push(c.qf_pre);
  push(c.cls_pre);
  return out;
}

std::size_t exact_kinks(const BaseCache& c) {
  std::size_t n = 0;
  const auto count = [&n](std::span<const double> pre) {
    n += static_cast<std::size_t>(std::count(pre.begin(), pre.end(), 0.0));
  };
  count(c.q_pre);
  for (const auto& a : c.att_pre) count(a);
  count(c.v_pre);
  count(c.qf_pre);
  count(c.cls_pre);
  return n;
}

}  // namespace gge::models
