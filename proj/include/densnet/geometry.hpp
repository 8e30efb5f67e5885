#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "densnet/so3.hpp"

namespace densnet {

enum class Species : int { H = 0, O = 1 };
inline constexpr int kNumSpecies = 2;

inline int species_index(Species s) { return static_cast<int>(s); }
std::string species_name(Species s);
/// "H" or "O"; anything else throws.
Species parse_species(std::string_view name);

/// Atomic species and positions in Angstrom.
struct Geometry {
  std::vector<Species> species;
  std::vector<so3::Vec3> positions;

  std::size_t size() const { return species.size(); }
  /// Throws on size mismatch or non-finite coordinates.
  void validate() const;
  double min_distance() const;

  Geometry rotated(const so3::Rotation& r) const;
  Geometry translated(const so3::Vec3& t) const;
  /// Point inversion through the origin.
  Geometry inverted() const;
  Geometry permuted(const std::vector<std::size_t>& order) const;
};

}  // namespace densnet
