#include "densnet/features.hpp"

#include "densnet/error.hpp"

namespace densnet::net {

FeatureTensor::FeatureTensor(IrrepsSpec s, int nodes)
    : spec(std::move(s)), num_nodes(nodes), values(static_cast<std::size_t>(nodes) * spec.dim(), 0.0) {}

FeatureTensor::FeatureTensor(IrrepsSpec s, int nodes, std::vector<double> v)
    : spec(std::move(s)), num_nodes(nodes), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(nodes) * spec.dim())
    throw Error("feature tensor: value count does not match nodes x dim(spec)");
}

std::vector<double> rotate_irreps(const IrrepsSpec& spec, std::span<const double> values, const so3::Rotation& r,
                                  bool inversion) {
  if (values.size() != static_cast<std::size_t>(spec.dim()))
    throw Error("rotate_irreps: vector length does not match spec " + spec.str());
  std::vector<double> out(values.size());
  std::map<int, Eigen::MatrixXd> cache;
  std::size_t offset = 0;
  for (const auto& ch : spec) {
    const int l = ch.irrep.l;
    const int d = ch.irrep.dim();
    auto it = cache.find(l);
    if (it == cache.end()) it = cache.emplace(l, so3::wigner_d(l, r)).first;
    const double sign = inversion && ch.irrep.parity == Parity::odd ? -1.0 : 1.0;
    for (int u = 0; u < ch.mul; ++u) {
      Eigen::Map<const Eigen::VectorXd> in(values.data() + offset, d);
      Eigen::Map<Eigen::VectorXd> o(out.data() + offset, d);
      o = sign * (it->second * in);
      offset += static_cast<std::size_t>(d);
    }
  }
  return out;
}

FeatureTensor rotate_features(const FeatureTensor& f, const so3::Rotation& r, bool inversion) {
  FeatureTensor out(f.spec, f.num_nodes);
  const int d = f.row_dim();
  for (int n = 0; n < f.num_nodes; ++n) {
    auto v = rotate_irreps(f.spec, std::span<const double>(f.row(n), static_cast<std::size_t>(d)), r, inversion);
    std::copy(v.begin(), v.end(), out.row(n));
  }
  return out;
}

void ChannelNormAccumulator::add(const FeatureTensor& features) {
  for (int n = 0; n < features.num_nodes; ++n) {
    const double* row = features.row(n);
    std::size_t offset = 0;
    for (const auto& ch : features.spec) {
      const int bd = ch.irrep.dim();
      auto& [sum, count] = sums_[ch.irrep.l];
      for (int u = 0; u < ch.mul; ++u) {
        double sq = 0.0;
        for (int m = 0; m < bd; ++m) sq += row[offset + m] * row[offset + m];
        sum += sq;
        ++count;
        offset += static_cast<std::size_t>(bd);
      }
    }
  }
}

std::map<int, double> ChannelNormAccumulator::result() const {
  std::map<int, double> out;
  for (const auto& [l, sc] : sums_) out[l] = sc.second > 0 ? sc.first / sc.second / (2.0 * l + 1.0) : 0.0;
  return out;
}

std::map<int, double> channel_norms(const FeatureTensor& features) {
  ChannelNormAccumulator acc;
  acc.add(features);
  return acc.result();
}

}  // namespace densnet::net
