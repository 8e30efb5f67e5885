#pragma once

#include <vector>

namespace densnet {

/// Per-atom density-fitting coefficients, each atom laid out by the irreps of
/// its species (see AuxiliaryBasis::spec / ModelConfig::output_spec).
struct DensityCoefficients {
  std::vector<std::vector<double>> atoms;

  std::size_t num_atoms() const { return atoms.size(); }
  std::size_t num_values() const {
    std::size_t n = 0;
    for (const auto& a : atoms) n += a.size();
    return n;
  }
  friend bool operator==(const DensityCoefficients&, const DensityCoefficients&) = default;
};

}  // namespace densnet
