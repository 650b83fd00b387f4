#include "gge/ensemble/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gge/error.hpp"
#include "gge/models/base_model.hpp"
#include "gge/models/branches.hpp"
#include "gge/nn/rng.hpp"
#include "trainer_internal.hpp"

namespace gge::ensemble {

using models::BaseForward;
using models::BranchForward;
using models::Instance;

namespace detail {

void check_loss(double value, const std::string& branch, std::size_t batch_index) {
  if (!std::isfinite(value)) {
    throw NumericError("non-finite loss in branch '" + branch + "' at batch " +
                       std::to_string(batch_index));
  }
}

void scale_in_place(nn::Vector& v, double s) {
  for (double& x : v) x *= s;
}

Branch make_branch(models::Network net, const TrainState& s, std::string_view label) {
  Branch b;
  b.params = models::init_network(net, s.arch, nn::derive_seed(s.config.seed, label));
  b.opt = nn::OptimizerState::create(
      b.params, nn::AdamaxConfig{s.config.lr, s.config.beta1, s.config.beta2, 1e-8});
  return b;
}

}  // namespace detail

namespace {

using detail::check_loss;
using detail::scale_in_place;

std::string component_name(Component c) {
  switch (c) {
    case Component::Distribution: return "distribution";
    case Component::Context: return "context";
    case Component::Self: return "self";
  }
  return "?";
}

Branch& learned_branch(TrainState& s, Component c) {
  auto& slot = c == Component::Context ? s.context : s.self_head;
  if (!slot) throw ConfigError("state lacks the " + component_name(c) + " branch");
  return *slot;
}

BranchForward learned_forward(const TrainState& s, Component c, const Instance& inst,
                              const BaseForward* base_fwd) {
  if (c == Component::Context) {
    if (!s.context) throw ConfigError("state lacks the context branch");
    return models::forward_context_branch(s.context->params, s.arch, inst);
  }
  if (!s.self_head) throw ConfigError("state lacks the self-ensemble head");
  // joint_repr is copied into the head's cache; the base forward is untouched.
  return models::forward_self_head(s.self_head->params, base_fwd->joint_repr);
}

void learned_backward(TrainState& s, Component c, const BranchForward& f,
                      std::span<const double> grad, nn::ParamGrads& grads) {
  if (c == Component::Context) {
    models::backward_context_branch(s.context->params, f, grad, grads);
  } else {
    models::backward_self_head(s.self_head->params, f, grad, grads);
  }
}

// Pseudo-label target for the stage preceded by the first `n` chain components.
nn::Vector stage_target(const TrainState& s, const std::vector<Component>& chain, std::size_t n,
                        const Instance& inst, const BaseForward* base_fwd,
                        const std::string& stage) {
  const auto composed = prefix_variant(s.config.variant, n);
  if (s.on_compose) s.on_compose(ComposeEvent{stage, composed});
  const auto family = s.config.loss_family;
  if (!composed) {
    const nn::Vector zero(inst.label.size(), 0.0);
    return losses::pseudo_label(family, inst.label, zero);
  }
  std::optional<std::span<const double>> bias_row;
  std::optional<std::span<const double>> logits;
  nn::Vector logits_storage;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain[i] == Component::Distribution) {
      if (!s.bias) throw ConfigError("state lacks the distribution-bias table");
      bias_row = s.bias->row(inst.type_id);
    } else {
      logits_storage = learned_forward(s, chain[i], inst, base_fwd).logits;
      logits = std::span<const double>(logits_storage);
    }
  }
  const auto h = compose_ensemble(*composed, family, bias_row, logits);
  return losses::pseudo_label(family, inst.label, h);
}

bool needs_context(Variant v) {
  return v == Variant::GgeQ || v == Variant::GgeDQ || v == Variant::SumDQ;
}
bool needs_self(Variant v) { return v == Variant::GgeSF || v == Variant::GgeDSF; }
bool needs_bias(Variant v) {
  const auto chain = bias_chain(v);
  return v == Variant::SumDQ ||
         std::find(chain.begin(), chain.end(), Component::Distribution) != chain.end();
}

void check_batch(Batch batch) {
  if (batch.empty()) throw DataError("empty batch");
}

}  // namespace

TrainState make_train_state(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                            const benchmark::Dataset& train) {
  config.validate();
  arch.validate();
  TrainState s;
  s.config = config;
  s.arch = arch;
  s.base = detail::make_branch(models::base_network(config.base_kind()), s, "base");
  const Variant v = config.variant;
  if (needs_context(v)) s.context = detail::make_branch(models::Network::ContextBranch, s, "context");
  if (needs_self(v)) s.self_head = detail::make_branch(models::Network::SelfHead, s, "self");
  if (v == Variant::Rubi) s.rubi = detail::make_branch(models::Network::RubiBranch, s, "rubi");
  if (needs_bias(v)) s.bias = fit_distribution_bias(train);
  return s;
}

BranchLosses train_step_iter(TrainState& s, Batch batch) {
  check_batch(batch);
  const auto chain = bias_chain(s.config.variant);
  const auto family = s.config.loss_family;
  const auto kind = s.config.base_kind();
  const double scale = 1.0 / static_cast<double>(batch.size());
  BranchLosses out;

  for (std::size_t m = 0; m < chain.size(); ++m) {
    const Component c = chain[m];
    if (c == Component::Distribution) continue;
    const std::string name = component_name(c);
    Branch& br = learned_branch(s, c);
    nn::ParamGrads grads = br.params.zeros_like();
    double total = 0.0;
    for (const Instance* inst : batch) {
      std::optional<BaseForward> bf;
      if (c == Component::Self) bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
      const auto target = stage_target(s, chain, m, *inst, bf ? &*bf : nullptr, name);
      const auto f = learned_forward(s, c, *inst, bf ? &*bf : nullptr);
      total += losses::loss(family, f.logits, target);
      auto g = losses::loss_grad_wrt_logits(family, f.logits, target);
      scale_in_place(g, scale);
      learned_backward(s, c, f, g, grads);
    }
    const double mean = total * scale;
    check_loss(mean, name, s.batch_index);
    nn::adamax_step(br.opt, br.params, grads);
    out[name] = mean;
  }

  nn::ParamGrads grads = s.base.params.zeros_like();
  double total = 0.0;
  for (const Instance* inst : batch) {
    const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
    const auto target = stage_target(s, chain, chain.size(), *inst, &bf, "base");
    total += losses::loss(family, bf.logits, target);
    auto g = losses::loss_grad_wrt_logits(family, bf.logits, target);
    scale_in_place(g, scale);
    models::backward_base(s.base.params, bf, g, grads);
  }
  const double mean = total * scale;
  check_loss(mean, "base", s.batch_index);
  nn::adamax_step(s.base.opt, s.base.params, grads);
  out["base"] = mean;
  ++s.batch_index;
  return out;
}

BranchLosses train_step_tog(TrainState& s, Batch batch) {
  check_batch(batch);
  const auto chain = bias_chain(s.config.variant);
  const auto family = s.config.loss_family;
  const auto kind = s.config.base_kind();
  const double scale = 1.0 / static_cast<double>(batch.size());

  struct Stage {
    Component component;
    std::size_t prefix;
    nn::ParamGrads grads;
    double total = 0.0;
  };
  std::vector<Stage> stages;
  for (std::size_t m = 0; m < chain.size(); ++m) {
    if (chain[m] == Component::Distribution) continue;
    stages.push_back({chain[m], m, learned_branch(s, chain[m]).params.zeros_like(), 0.0});
  }
  nn::ParamGrads base_grads = s.base.params.zeros_like();
  double base_total = 0.0;

  for (const Instance* inst : batch) {
    const auto bf = models::forward_base_kind(kind, s.base.params, s.arch, *inst);
    for (auto& st : stages) {
      const auto target =
          stage_target(s, chain, st.prefix, *inst, &bf, component_name(st.component));
      const auto f = learned_forward(s, st.component, *inst, &bf);
      st.total += losses::loss(family, f.logits, target);
      auto g = losses::loss_grad_wrt_logits(family, f.logits, target);
      scale_in_place(g, scale);
      learned_backward(s, st.component, f, g, st.grads);
    }
    const auto target = stage_target(s, chain, chain.size(), *inst, &bf, "base");
    base_total += losses::loss(family, bf.logits, target);
    auto g = losses::loss_grad_wrt_logits(family, bf.logits, target);
    scale_in_place(g, scale);
    models::backward_base(s.base.params, bf, g, base_grads);
  }

  BranchLosses out;
  for (auto& st : stages) {
    const std::string name = component_name(st.component);
    out[name] = st.total * scale;
    check_loss(out[name], name, s.batch_index);
  }
  out["base"] = base_total * scale;
  check_loss(out["base"], "base", s.batch_index);

  // Every gradient above was taken at the pre-update parameters.
  for (auto& st : stages) {
    Branch& br = learned_branch(s, st.component);
    nn::adamax_step(br.opt, br.params, st.grads);
  }
  nn::adamax_step(s.base.opt, s.base.params, base_grads);
  ++s.batch_index;
  return out;
}

BranchLosses train_step(TrainState& s, Batch batch) {
  switch (s.config.variant) {
    case Variant::SumDQ: return train_step_sum_dq(s, batch);
    case Variant::Rubi: return train_step_rubi(s, batch);
    case Variant::InverseSupervision: return train_step_inverse_supervision(s, batch);
    default: break;
  }
  if (uses_schedule(s.config.variant) && s.config.schedule == Schedule::Tog) {
    return train_step_tog(s, batch);
  }
  return train_step_iter(s, batch);
}

std::vector<std::string> loss_columns(const EnsembleConfig& config) {
  switch (config.variant) {
    case Variant::GgeQ:
    case Variant::GgeDQ: return {"context", "base"};
    case Variant::GgeSF:
    case Variant::GgeDSF: return {"self", "base"};
    case Variant::SumDQ: return {"joint"};
    case Variant::Rubi: return {"masked", "question"};
    case Variant::InverseSupervision: return {"base", "round2"};
    default: return {"base"};
  }
}

namespace detail {

RunRecord run_training(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                       const benchmark::Dataset& data,
                       const std::function<void(const ComposeEvent&)>& on_compose) {
  const auto start = std::chrono::steady_clock::now();
  if (data.empty()) throw DataError("training set is empty");
  for (const auto& inst : data.instances) models::check_instance(inst, arch);

  TrainState s = make_train_state(config, arch, data);
  s.on_compose = on_compose;

  RunRecord rec;
  rec.config = config;
  rec.arch = arch;
  rec.loss_columns = loss_columns(config);

  std::vector<const Instance*> order(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) order[i] = &data.instances[i];
  const nn::Rng shuffle_root(nn::derive_seed(config.seed, "shuffle"));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    nn::Rng rng = shuffle_root.split(static_cast<std::uint64_t>(epoch));
    rng.shuffle(std::span<const Instance*>(order));
    BranchLosses sums;
    std::map<std::string, std::size_t> counts;
    for (std::size_t start_i = 0; start_i < order.size(); start_i += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start_i);
      const auto losses = train_step(s, Batch(order.data() + start_i, len));
      for (const auto& [k, v] : losses) {
        sums[k] += v;
        counts[k] += 1;
      }
    }
    BranchLosses mean;
    for (const auto& col : rec.loss_columns) {
      mean[col] = counts[col] ? sums[col] / static_cast<double>(counts[col]) : 0.0;
    }
    rec.epoch_losses.push_back(std::move(mean));
  }

  rec.params.emplace("base", s.base.params);
  if (s.context) rec.params.emplace("context", s.context->params);
  if (s.self_head) rec.params.emplace("self", s.self_head->params);
  if (s.rubi) rec.params.emplace("rubi", s.rubi->params);
  rec.bias = s.bias;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace detail

RunRecord train(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                const benchmark::Dataset& data,
                const std::function<void(const ComposeEvent&)>& on_compose) {
  switch (config.variant) {
    case Variant::SumDQ: return train_sum_dq(config, arch, data);
    case Variant::Rubi: return train_rubi(config, arch, data);
    default: return detail::run_training(config, arch, data, on_compose);
  }
}

}  // namespace gge::ensemble
