#include "densnet/graph.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "densnet/error.hpp"

namespace densnet::net {

std::array<double, kNumSpecies> Graph::one_hot(Species s) {
  std::array<double, kNumSpecies> v{};
  v[static_cast<std::size_t>(species_index(s))] = 1.0;
  return v;
}

Graph build_graph(const Geometry& geometry, double cutoff) {
  geometry.validate();
  if (geometry.size() == 0) throw Error("build_graph: geometry has no atoms");
  if (!(cutoff > 0.0)) throw Error("build_graph: cutoff must be positive");
  Graph g;
  g.species = geometry.species;
  g.positions = geometry.positions;
  g.cutoff = cutoff;
  const int n = static_cast<int>(geometry.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const so3::Vec3 d = geometry.positions[j] - geometry.positions[i];
      const double r = d.norm();
      if (r < 1e-6)
        throw Error("build_graph: atoms " + std::to_string(std::min(i, j)) + " and " +
                    std::to_string(std::max(i, j)) + " coincide");
      if (r <= cutoff) g.edges.push_back({i, j, d, r});
    }
  }
  return g;
}

namespace {
constexpr int kEnvelopeP = 6;
}

double cutoff_envelope(double distance, double cutoff) {
  const double x = distance / cutoff;
  if (x >= 1.0) return 0.0;
  constexpr double p = kEnvelopeP;
  const double xp = std::pow(x, p);
  return 1.0 - (p + 1.0) * (p + 2.0) / 2.0 * xp + p * (p + 2.0) * xp * x - p * (p + 1.0) / 2.0 * xp * x * x;
}

void radial_basis(double distance, double cutoff, std::span<double> out) {
  if (!(distance > 0.0)) throw Error("radial_basis: distance must be positive");
  if (distance > cutoff) throw Error("radial_basis: distance exceeds cutoff");
  const double env = cutoff_envelope(distance, cutoff);
  const double pref = std::sqrt(2.0 / cutoff) / distance * env;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = pref * std::sin(static_cast<double>(k + 1) * std::numbers::pi * distance / cutoff);
}

std::vector<double> radial_basis(double distance, int n, double cutoff) {
  if (n < 1) throw Error("radial_basis: need at least one function");
  std::vector<double> out(static_cast<std::size_t>(n));
  radial_basis(distance, cutoff, out);
  return out;
}

}  // namespace densnet::net
