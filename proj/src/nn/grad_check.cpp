#include "gge/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "gge/error.hpp"

namespace gge::nn {

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradients(const std::function<double(const Params&)>& loss,
                                const Params& params, const ParamGrads& analytic, double eps) {
  return check_gradients(loss, params, analytic, eps, {});
}

GradCheckResult check_gradients(const std::function<double(const Params&)>& loss,
                                const Params& params, const ParamGrads& analytic, double eps,
                                const KinkPattern& pattern) {
  if (!(eps > 0.0) || eps > 1e-2) throw ConfigError("grad check step must be in (0, 1e-2]");
  if (!params.same_shape(analytic)) throw ShapeError("grad check: gradient shape mismatch");

  GradCheckResult result;
  Params probe = params;
  Params analytic_copy = analytic;
  // Collect analytic values in visitation order, then perturb the probe in the same order.
  std::vector<double> expected;
  expected.reserve(params.value_count());
  for_each_value(analytic_copy,
                 [&](const std::string&, bool, std::size_t, double& v) { expected.push_back(v); });
  const std::vector<bool> base_pattern = pattern ? pattern(params) : std::vector<bool>{};
  bool have_worst = false;

  std::size_t k = 0;
  for_each_value(probe, [&](const std::string& layer, bool is_bias, std::size_t index, double& v) {
    const double original = v;
    double step = eps;
    double numeric = 0.0;
    bool clean = false;
    for (int attempt = 0; attempt < 4; ++attempt, step /= 10.0) {
      v = original + step;
      const double up = loss(probe);
      clean = !pattern || pattern(probe) == base_pattern;
      v = original - step;
      const double down = loss(probe);
      clean = clean && (!pattern || pattern(probe) == base_pattern);
      numeric = (up - down) / (2.0 * step);
      if (clean) break;
      if (attempt == 0) ++result.refined;
    }
    v = original;
    ++result.checked;
    if (!clean) {
      ++result.skipped;
      ++k;
      return;
    }
    const double err = relative_error(expected[k], numeric);
    if (err > result.max_relative_error || !have_worst) {
      have_worst = true;
      result.max_relative_error = err;
      result.worst_layer = layer;
      result.worst_is_bias = is_bias;
      result.worst_index = index;
      result.worst_analytic = expected[k];
      result.worst_numeric = numeric;
    }
    ++k;
  });
  return result;
}

}  // namespace gge::nn
