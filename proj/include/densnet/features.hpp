#pragma once

#include <map>
#include <vector>

#include "densnet/irreps.hpp"
#include "densnet/so3.hpp"

namespace densnet::net {

/// Node features: num_nodes rows of dim(spec) values, row-major.
struct FeatureTensor {
  IrrepsSpec spec;
  int num_nodes = 0;
  std::vector<double> values;

  FeatureTensor() = default;
  FeatureTensor(IrrepsSpec s, int nodes);
  FeatureTensor(IrrepsSpec s, int nodes, std::vector<double> v);

  int row_dim() const { return spec.dim(); }
  double* row(int node) { return values.data() + static_cast<std::size_t>(node) * row_dim(); }
  const double* row(int node) const { return values.data() + static_cast<std::size_t>(node) * row_dim(); }
};

/// Applies the block-diagonal Wigner-D of `spec` (times parity^k when
/// `inversion` is set) to one flat vector laid out by `spec`.
std::vector<double> rotate_irreps(const IrrepsSpec& spec, std::span<const double> values, const so3::Rotation& r,
                                  bool inversion = false);
FeatureTensor rotate_features(const FeatureTensor& f, const so3::Rotation& r, bool inversion = false);

/// Mean over nodes and copies of the squared (2l+1)-block norm, divided by
/// 2l+1, for each l present (both parities pooled).
std::map<int, double> channel_norms(const FeatureTensor& features);

}  // namespace densnet::net

namespace densnet::net {

/// Pools channel_norms over several tensors (e.g. every structure of a probe
/// set) by summing block norms and counts before dividing.
class ChannelNormAccumulator {
 public:
  void add(const FeatureTensor& features);
  std::map<int, double> result() const;

 private:
  std::map<int, std::pair<double, long>> sums_;
};

}  // namespace densnet::net
