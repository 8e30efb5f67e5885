#pragma once

#include <span>
#include <vector>

namespace densnet::net {

struct AdamParams {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit OptimizerState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place. Throws on size
/// mismatch or a non-finite gradient entry (parameters are left untouched).
void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
               const AdamParams& hp = {});

}  // namespace densnet::net
