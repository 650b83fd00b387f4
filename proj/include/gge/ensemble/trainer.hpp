#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gge/benchmark/generator.hpp"
#include "gge/ensemble/compose.hpp"
#include "gge/ensemble/config.hpp"
#include "gge/ensemble/distribution_bias.hpp"
#include "gge/models/architecture.hpp"
#include "gge/nn/adamax.hpp"
#include "gge/nn/params.hpp"

namespace gge::ensemble {

struct Branch {
  nn::Params params;
  nn::OptimizerState opt;
};

// Emitted every time a pseudo-label target is computed. `composed` is the
// variant handed to compose_ensemble, or nullopt when H = 0 (ground truth).
struct ComposeEvent {
  std::string stage;  // branch whose target this is
  std::optional<Variant> composed;
};

struct TrainState {
  EnsembleConfig config;
  models::ArchitectureSpec arch;
  Branch base;
  std::optional<Branch> context;    // gge-q, gge-dq, sum-dq
  std::optional<Branch> self_head;  // gge-sf, gge-d-sf
  std::optional<Branch> rubi;       // rubi
  std::optional<DistributionBiasTable> bias;
  std::size_t batch_index = 0;
  std::function<void(const ComposeEvent&)> on_compose;
};

using Batch = std::span<const models::Instance* const>;
using BranchLosses = std::map<std::string, double>;

// Initializes every branch the variant needs from seeds derived from
// config.seed, and fits the distribution bias on `train` when used.
TrainState make_train_state(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                            const benchmark::Dataset& train);

/// One batch of greedy training, each update applied before the next
/// branch's target is computed: every learned biased branch m is fit to the
/// pseudo-label of H_{m-1}, then the base model to the pseudo-label of H_M.
/// Variants without a biased branch reduce to a single base update.
BranchLosses train_step_iter(TrainState& state, Batch batch);

/// One joint step: all targets come from the pre-update parameters and are
/// constants; every branch is then stepped once.
BranchLosses train_step_tog(TrainState& state, Batch batch);

// L(B_d + f(B_q) + f(A), y) on the summed score; both branches updated.
BranchLosses train_step_sum_dq(TrainState& state, Batch batch);

// L(A * sigmoid(G_q), y) + L(c_q(G_q), y).
BranchLosses train_step_rubi(TrainState& state, Batch batch);

// Round 1 on the labels, round 2 on the labels minus the round-1 top-N answers.
BranchLosses train_step_inverse_supervision(TrainState& state, Batch batch);

// Picks the step for the configured variant and schedule.
BranchLosses train_step(TrainState& state, Batch batch);

// Removes the `n` highest-probability answers from the positive label set
// (ties broken by lower index). Remaining scores are kept.
nn::Vector inverse_supervision_round(std::span<const double> labels,
                                     std::span<const double> probs, std::size_t n);

struct RunRecord {
  EnsembleConfig config;
  models::ArchitectureSpec arch;
  std::vector<std::string> loss_columns;
  std::vector<BranchLosses> epoch_losses;  // mean over batches, one per epoch
  std::map<std::string, nn::Params> params;  // "base" plus any biased branches
  std::optional<DistributionBiasTable> bias;
  double wall_seconds = 0.0;
};

// Loss column names produced for a variant.
std::vector<std::string> loss_columns(const EnsembleConfig& config);

/// Full training run: seeded shuffling, `epochs` passes of batches, final
/// (last-epoch) parameters for every branch. Only the base model is meant for
/// evaluation.
RunRecord train(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                const benchmark::Dataset& data,
                const std::function<void(const ComposeEvent&)>& on_compose = {});

RunRecord train_sum_dq(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                       const benchmark::Dataset& data);
RunRecord train_rubi(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                     const benchmark::Dataset& data);

}  // namespace gge::ensemble
