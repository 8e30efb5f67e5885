#include "densnet/optimizer.hpp"

#include <cmath>

#include "densnet/error.hpp"

namespace densnet::net {

void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
               const AdamParams& hp) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw Error("adam_step: parameter, gradient and moment sizes differ");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i])) throw Error("adam_step: non-finite gradient at index " + std::to_string(i));
  ++state.step;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * grads[i];
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

}  // namespace densnet::net
