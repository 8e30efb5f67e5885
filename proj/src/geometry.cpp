#include "densnet/geometry.hpp"

#include <cmath>
#include <limits>

#include "densnet/error.hpp"

namespace densnet {

std::string species_name(Species s) { return s == Species::H ? "H" : "O"; }

Species parse_species(std::string_view name) {
  if (name == "H") return Species::H;
  if (name == "O") return Species::O;
  throw Error("unknown species '" + std::string(name) + "' (expected H or O)");
}

void Geometry::validate() const {
  if (species.size() != positions.size()) throw Error("geometry: species/position count mismatch");
  for (const auto& p : positions)
    if (!p.allFinite()) throw Error("geometry: non-finite coordinate");
}

double Geometry::min_distance() const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j) d = std::min(d, (positions[i] - positions[j]).norm());
  return d;
}

Geometry Geometry::rotated(const so3::Rotation& r) const {
  Geometry g = *this;
  for (auto& p : g.positions) p = r * p;
  return g;
}

Geometry Geometry::translated(const so3::Vec3& t) const {
  Geometry g = *this;
  for (auto& p : g.positions) p += t;
  return g;
}

Geometry Geometry::inverted() const {
  Geometry g = *this;
  for (auto& p : g.positions) p = -p;
  return g;
}

Geometry Geometry::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != size()) throw Error("geometry: permutation size mismatch");
  Geometry g;
  for (std::size_t k : order) {
    g.species.push_back(species.at(k));
    g.positions.push_back(positions.at(k));
  }
  return g;
}

}  // namespace densnet
