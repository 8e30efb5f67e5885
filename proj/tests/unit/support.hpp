#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "densnet/basis.hpp"
#include "densnet/coefficients.hpp"
#include "densnet/dataset.hpp"
#include "densnet/features.hpp"
#include "densnet/geometry.hpp"
#include "densnet/model.hpp"

namespace testing_support {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs_diff(const densnet::DensityCoefficients& a, const densnet::DensityCoefficients& b) {
  if (a.atoms.size() != b.atoms.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.atoms.size(); ++i) d = std::max(d, max_abs_diff(a.atoms[i], b.atoms[i]));
  return d;
}

inline densnet::so3::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  densnet::so3::Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Output spec of the built-in basis.
inline std::array<densnet::IrrepsSpec, densnet::kNumSpecies> basis_specs(const densnet::density::AuxiliaryBasis& b) {
  return {b.spec(densnet::Species::H), b.spec(densnet::Species::O)};
}

/// A small model emitting the built-in basis layout.
inline densnet::net::ModelConfig desk_config(int l_h = 1, int n_s = 4, int layers = 2, std::uint64_t seed = 11) {
  densnet::net::ModelConfig c;
  c.num_layers = layers;
  c.hidden_spec = densnet::hidden_config(l_h, n_s);
  c.output_spec = basis_specs(densnet::density::synthetic_basis());
  c.seed = seed;
  return c;
}

/// Per-atom block rotation of coefficients (optionally with inversion).
inline densnet::DensityCoefficients rotate_coeffs(const std::array<densnet::IrrepsSpec, densnet::kNumSpecies>& specs,
                                                  const densnet::Geometry& g, const densnet::DensityCoefficients& c,
                                                  const densnet::so3::Rotation& r, bool inversion = false) {
  densnet::DensityCoefficients out = c;
  for (std::size_t a = 0; a < g.size(); ++a)
    out.atoms[a] = densnet::net::rotate_irreps(specs[static_cast<std::size_t>(densnet::species_index(g.species[a]))],
                                               c.atoms[a], r, inversion);
  return out;
}

inline densnet::DensityCoefficients random_coeffs(const densnet::density::AuxiliaryBasis& b, const densnet::Geometry& g,
                                                  std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  densnet::DensityCoefficients c;
  for (auto s : g.species) {
    std::vector<double> v(static_cast<std::size_t>(b.dim(s)));
    for (auto& x : v) x = n(rng);
    c.atoms.push_back(std::move(v));
  }
  return c;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace testing_support
