#pragma once

#include <array>
#include <string>
#include <vector>

#include "densnet/coefficients.hpp"
#include "densnet/geometry.hpp"
#include "densnet/irreps.hpp"

namespace densnet::density {

/// One contracted-free shell: r^l Y_lm(r^) exp(-alpha r^2), L2-normalized.
/// Parity is (-1)^l.
struct Shell {
  int l = 0;
  double exponent = 1.0;  // Angstrom^-2

  double norm() const;
  friend bool operator==(const Shell&, const Shell&) = default;
};

/// sqrt(2 (2 alpha)^(l+3/2) / Gamma(l+3/2)).
double shell_norm(int l, double exponent);

/// Per-species ordered shell lists. The coefficient layout of a species is
/// its shells in order, 2l+1 values each, m from -l to l.
class AuxiliaryBasis {
 public:
  AuxiliaryBasis() = default;
  explicit AuxiliaryBasis(std::array<std::vector<Shell>, kNumSpecies> shells);

  const std::vector<Shell>& shells(Species s) const { return shells_[static_cast<std::size_t>(species_index(s))]; }
  bool has_species(Species s) const { return !shells(s).empty(); }
  /// Consecutive shells of equal l merged into one channel.
  IrrepsSpec spec(Species s) const;
  int dim(Species s) const;
  int lmax() const;
  /// Every l carried by some species.
  std::vector<int> ls() const;
  AuxiliaryBasis truncated(int lmax) const;

  friend bool operator==(const AuxiliaryBasis&, const AuxiliaryBasis&) = default;

 private:
  std::array<std::vector<Shell>, kNumSpecies> shells_;
};

/// Even-tempered stand-in for an auxiliary fitting basis: O carries
/// 12x0e+5x1o+4x2e+2x3o+1x4e, H carries 4x0e+2x1o+1x2e.
AuxiliaryBasis synthetic_basis();

/// Text format: one shell per line, `species l exponent`, `#` comments.
/// Shell order within a species is the coefficient order.
AuxiliaryBasis parse_basis(const std::string& text);
std::string format_basis(const AuxiliaryBasis& basis);
AuxiliaryBasis load_basis(const std::string& path);
void save_basis(const AuxiliaryBasis& basis, const std::string& path);

/// Throws unless every atom's coefficient vector has its species' dim.
void check_layout(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& coeffs);

}  // namespace densnet::density
