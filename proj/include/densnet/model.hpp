#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "densnet/coefficients.hpp"
#include "densnet/features.hpp"
#include "densnet/geometry.hpp"
#include "densnet/graph.hpp"
#include "densnet/irreps.hpp"

namespace densnet::net {

struct ModelConfig {
  /// Number of gated hidden layers; an output convolution follows them.
  int num_layers = 3;
  IrrepsSpec hidden_spec = hidden_config(2, 8);
  /// Output irreps per species, indexed by species_index (H, O).
  std::array<IrrepsSpec, kNumSpecies> output_spec;
  /// Spherical-harmonic degree on edges; -1 selects max(l hidden, l output).
  int lmax_sh = -1;
  double cutoff = 3.5;
  int radial_basis_size = 8;
  int radial_hidden_width = 16;
  /// Messages are summed and divided by sqrt(avg_num_neighbors).
  double avg_num_neighbors = 8.0;
  bool self_connection = true;
  std::uint64_t seed = 0;

  int resolved_lmax_sh() const;
  /// Throws on num_layers < 1, empty specs, non-positive sizes.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One tensor-product path of the convolution: input channel (x) Y_{l_sh}
/// -> l_out, with one radial weight per input copy.
struct TensorPath {
  int in_channel = 0;
  int in_offset = 0;
  int mul = 0;
  int l_in = 0;
  int l_sh = 0;
  Irrep out;
  int mid_offset = 0;
  int weight_offset = 0;  // into the radial network output
  int kernel = 0;         // index into ConvLayer::kernels
};

/// Weights W[u][w] mapping `src_mul` copies of an irrep onto `dst_mul`
/// copies: dst[w] += scale * sum_u W[u][w] src[u].
struct LinearBlock {
  int src_offset = 0;
  int src_mul = 0;
  int dst_offset = 0;
  int dst_mul = 0;
  int block_dim = 0;
  int weight_offset = 0;  // absolute, into the model parameter vector
  double scale = 1.0;
};

/// Layout of a gated activation: input = scalars ++ gates ++ gated,
/// output = scalars ++ gated.
struct GateLayout {
  IrrepsSpec scalars;
  IrrepsSpec gates;
  IrrepsSpec gated;

  IrrepsSpec input_spec() const;
  IrrepsSpec output_spec() const;
};

struct KernelKey {
  int l_in, l_sh, l_out;
  friend bool operator==(const KernelKey&, const KernelKey&) = default;
};

struct ConvLayer {
  IrrepsSpec in_spec;
  IrrepsSpec mid_spec;
  std::vector<TensorPath> paths;
  std::vector<KernelKey> kernels;
  int radial_outputs = 0;

  /// Convolution output per species (identical for hidden layers).
  std::array<IrrepsSpec, kNumSpecies> out_spec;
  /// 1 for hidden layers (shared mixing), kNumSpecies for the output head.
  int mix_groups = 1;
  std::array<std::vector<LinearBlock>, kNumSpecies> mix;
  std::array<std::vector<LinearBlock>, kNumSpecies> self;

  bool gated = false;
  GateLayout gate;

  int w1_offset = 0;  // radial_basis_size x radial_hidden_width
  int w2_offset = 0;  // radial_hidden_width x radial_outputs
  int param_begin = 0;
  int param_end = 0;
};

/// Plans every layer of a config without touching weights or CG arrays.
std::vector<ConvLayer> plan_layers(const ModelConfig& config);

/// Exact learnable scalar count of the planned layers.
std::size_t param_count(const ModelConfig& config);

/// Model-specific geometric inputs for one structure.
struct StructureInput {
  Graph graph;
  int lmax_sh = 0;
  std::vector<double> sh;      // per edge (lmax_sh+1)^2, Y(x_j - x_i)
  std::vector<double> radial;  // per edge radial_basis_size
};

/// Intermediate values kept for the backward pass.
struct LayerTrace {
  std::vector<double> input;       // nodes x dim(in_spec)
  std::vector<double> radial_pre;  // edges x hidden width
  std::vector<double> radial_out;  // edges x radial_outputs
  std::vector<double> mid;         // nodes x dim(mid_spec)
  std::vector<double> conv_out;    // per-node conv output (offsets below)
  std::vector<int> out_offsets;    // nodes + 1
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
};

class Model {
 public:
  /// Plans the layers and draws standard-normal parameters from config.seed.
  explicit Model(ModelConfig config);
  /// Restores a model from an explicit parameter vector (checkpoints).
  Model(ModelConfig config, std::vector<double> params);

  const ModelConfig& config() const { return config_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  StructureInput prepare(const Geometry& geometry) const;
  DensityCoefficients forward(const Geometry& geometry) const;
  DensityCoefficients forward(const StructureInput& input, ForwardTrace* trace = nullptr) const;
  /// Post-gate features of every hidden layer.
  std::vector<FeatureTensor> hidden_features(const StructureInput& input) const;

 private:
  ModelConfig config_;
  std::vector<ConvLayer> layers_;
  std::vector<double> params_;
};

/// Node input features: the species one-hot as 2x0e.
FeatureTensor species_features(const Graph& graph);

/// Equivariant convolution of a hidden layer (message passing, linear mix,
/// optional self-connection). Returns the pre-gate features.
FeatureTensor convolution(const ConvLayer& layer, std::span<const double> params, const FeatureTensor& features,
                          const StructureInput& input, const ModelConfig& config);

/// Gated nonlinearity: silu on even scalars, tanh on odd scalars, and each
/// gated copy multiplied by sigmoid of its gate scalar.
FeatureTensor gate(const FeatureTensor& features, const GateLayout& layout);

/// Mean over all entries of the squared difference; throws on layout
/// mismatch.
double loss_mse(const DensityCoefficients& pred, const DensityCoefficients& target);

struct Sample {
  const StructureInput* input = nullptr;
  const DensityCoefficients* target = nullptr;
};

struct GradientResult {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss (MSE over every coefficient of the batch) and its exact gradient
/// with respect to the parameters. Members may be evaluated on `workers`
/// threads; the reduction order is fixed, so the result does not depend on
/// the worker count.
GradientResult gradient(const Model& model, std::span<const Sample> batch, int workers = 1);

}  // namespace densnet::net
