#pragma once

// Row-level building blocks shared by the forward and backward passes.

#include <cmath>
#include <span>
#include <vector>

#include "densnet/model.hpp"
#include "densnet/so3.hpp"

namespace densnet::net::detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

/// Per-edge coupling kernels K[m1][m3] = sum_m2 C[m1][m2][m3] Y_{l_sh}[m2]
/// for every kernel a layer uses.
class EdgeKernels {
 public:
  explicit EdgeKernels(const ConvLayer& layer);
  void compute(std::span<const double> sh);
  const double* kernel(int k) const { return buffers_[static_cast<std::size_t>(k)].data(); }

 private:
  std::vector<KernelKey> keys_;
  std::vector<const std::vector<so3::CGEntry>*> cg_;
  std::vector<std::vector<double>> buffers_;
};

/// Forward convolution of one layer; fills radial_pre, radial_out, mid,
/// conv_out and out_offsets of `trace` (trace.input must be set).
void conv_forward(const ConvLayer& layer, std::span<const double> params, const StructureInput& input,
                  const ModelConfig& config, LayerTrace& trace);

/// Backward of conv_forward. Accumulates parameter gradients into `grad`
/// and input gradients into `d_input` (nodes x dim(in_spec)).
void conv_backward(const ConvLayer& layer, std::span<const double> params, const StructureInput& input,
                   const ModelConfig& config, const LayerTrace& trace, std::span<const double> d_out,
                   std::span<double> grad, std::span<double> d_input);

void gate_row(const GateLayout& layout, const double* in, double* out);
/// Given pre-gate row `in` and output gradient `d_out`, writes d_in.
void gate_row_backward(const GateLayout& layout, const double* in, const double* d_out, double* d_in);

}  // namespace densnet::net::detail
