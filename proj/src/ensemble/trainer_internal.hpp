#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "gge/ensemble/trainer.hpp"

namespace gge::ensemble::detail {

void check_loss(double value, const std::string& branch, std::size_t batch_index);
void scale_in_place(nn::Vector& v, double s);
Branch make_branch(models::Network net, const TrainState& s, std::string_view label);

// Shared epoch/batch loop; dispatches each batch through train_step.
RunRecord run_training(const EnsembleConfig& config, const models::ArchitectureSpec& arch,
                       const benchmark::Dataset& data,
                       const std::function<void(const ComposeEvent&)>& on_compose);

}  // namespace gge::ensemble::detail
