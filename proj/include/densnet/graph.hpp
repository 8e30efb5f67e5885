#pragma once

#include <array>
#include <span>
#include <vector>

#include "densnet/geometry.hpp"

namespace densnet::net {

struct Edge {
  int target = 0;  // i: receives the message
  int source = 0;  // j
  so3::Vec3 displacement;  // x_j - x_i
  double distance = 0.0;
};

/// Directed neighbor graph. Edge (i, j) exists iff 0 < |x_j - x_i| <= cutoff;
/// edges are sorted by (i, j).
struct Graph {
  std::vector<Species> species;
  std::vector<so3::Vec3> positions;
  std::vector<Edge> edges;
  double cutoff = 0.0;

  int num_nodes() const { return static_cast<int>(species.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  /// One-hot species attribute: H -> (1,0), O -> (0,1).
  static std::array<double, kNumSpecies> one_hot(Species s);
};

/// Throws on empty geometry, non-finite coordinates, or two atoms closer
/// than 1e-6 Angstrom.
Graph build_graph(const Geometry& geometry, double cutoff);

/// Smooth polynomial envelope u(d/cutoff), 1 at the origin, 0 with vanishing
/// first and second derivatives at the cutoff, monotone in between.
double cutoff_envelope(double distance, double cutoff);

/// n Bessel functions sqrt(2/c) sin(k pi d / c) / d, k = 1..n, times the
/// cutoff envelope. Requires 0 < distance <= cutoff.
std::vector<double> radial_basis(double distance, int n, double cutoff);
void radial_basis(double distance, double cutoff, std::span<double> out);

}  // namespace densnet::net
