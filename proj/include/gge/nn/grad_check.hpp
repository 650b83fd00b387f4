#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gge/nn/params.hpp"

namespace gge::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_layer;
  bool worst_is_bias = false;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t refined = 0;  // coordinates re-probed at a smaller step
  std::size_t skipped = 0;  // still straddling a kink at the smallest step
};

// Sign pattern of every ReLU pre-activation reached by the loss.
using KinkPattern = std::function<std::vector<bool>(const Params&)>;

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
// turning finite-difference truncation noise into huge ratios.
inline constexpr double kRelativeErrorFloor = 1e-3;
double relative_error(double analytic, double numeric) noexcept;

// Compares `analytic` against central differences (loss(p + eps) - loss(p - eps)) / 2eps
// for every scalar in `params`.
GradCheckResult check_gradients(const std::function<double(const Params&)>& loss,
                                const Params& params, const ParamGrads& analytic, double eps);

// Same, but a central difference whose two probes see a different ReLU
// pattern than the unperturbed point is not a derivative at all. Such a
// coordinate is re-probed at eps/10, eps/100, eps/1000; if every step still
// straddles the kink it is counted in `skipped` and left out of the maximum.
GradCheckResult check_gradients(const std::function<double(const Params&)>& loss,
                                const Params& params, const ParamGrads& analytic, double eps,
                                const KinkPattern& pattern);

}  // namespace gge::nn
