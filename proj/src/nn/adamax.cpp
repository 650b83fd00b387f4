#include "gge/nn/adamax.hpp"

#include <algorithm>
#include <cmath>

#include "gge/error.hpp"

namespace gge::nn {

OptimizerState OptimizerState::create(const Params& params, AdamaxConfig config) {
  if (!(config.lr > 0.0)) throw ConfigError("adamax learning rate must be > 0");
  OptimizerState s;
  s.m = params.zeros_like();
  s.u = params.zeros_like();
  s.config = config;
  return s;
}

namespace {

void update(std::span<double> theta, std::span<double> m, std::span<double> u,
            std::span<const double> g, const AdamaxConfig& c, double step_size) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    u[i] = std::max(c.beta2 * u[i], std::abs(g[i]));
    theta[i] -= step_size * m[i] / (u[i] + c.eps);
  }
}

}  // namespace

void adamax_step(OptimizerState& state, Params& params, const ParamGrads& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.u)) {
    throw ShapeError("adamax_step: parameter, gradient and state shapes differ");
  }
  for (const auto& [name, g] : grads) {
    const auto bad_w = std::find_if(g.weight.values().begin(), g.weight.values().end(),
                                    [](double v) { return !std::isfinite(v); });
    if (bad_w != g.weight.values().end()) {
      throw NumericError("non-finite gradient in " + name + ".weight[" +
                         std::to_string(bad_w - g.weight.values().begin()) + "]");
    }
    const auto bad_b = std::find_if(g.bias.begin(), g.bias.end(),
                                    [](double v) { return !std::isfinite(v); });
    if (bad_b != g.bias.end()) {
      throw NumericError("non-finite gradient in " + name + ".bias[" +
                         std::to_string(bad_b - g.bias.begin()) + "]");
    }
  }

  state.t += 1;
  const double step_size =
      state.config.lr / (1.0 - std::pow(state.config.beta1, static_cast<double>(state.t)));
  auto m_it = state.m.begin();
  auto u_it = state.u.begin();
  auto g_it = grads.begin();
  for (auto p_it = params.begin(); p_it != params.end(); ++p_it, ++m_it, ++u_it, ++g_it) {
    update(p_it->second.weight.values(), m_it->second.weight.values(),
           u_it->second.weight.values(), g_it->second.weight.values(), state.config, step_size);
    update(p_it->second.bias, m_it->second.bias, u_it->second.bias, g_it->second.bias,
           state.config, step_size);
  }
}

}  // namespace gge::nn
