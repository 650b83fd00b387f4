#pragma once

#include <cstdint>

#include "gge/nn/params.hpp"

namespace gge::nn {

struct AdamaxConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adamax moments for one parameter set:
///   m <- b1 m + (1 - b1) g
///   u <- max(b2 u, |g|)
///   theta <- theta - lr / (1 - b1^t) * m / (u + eps)
struct OptimizerState {
  Params m;
  Params u;
  std::int64_t t = 0;
  AdamaxConfig config;

  static OptimizerState create(const Params& params, AdamaxConfig config = {});

  bool operator==(const OptimizerState& other) const {
    return m == other.m && u == other.u && t == other.t && config.lr == other.config.lr &&
           config.beta1 == other.config.beta1 && config.beta2 == other.config.beta2 &&
           config.eps == other.config.eps;
  }
};

// Throws NumericError naming the first non-finite gradient entry (params and
// state are left untouched in that case) and ShapeError on a shape mismatch.
void adamax_step(OptimizerState& state, Params& params, const ParamGrads& grads);

}  // namespace gge::nn
