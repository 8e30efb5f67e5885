#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "densnet/basis.hpp"
#include "densnet/coefficients.hpp"
#include "densnet/geometry.hpp"
#include "densnet/model.hpp"

namespace densnet::data {

inline constexpr double kOHBond = 0.9572;        // Angstrom
inline constexpr double kHOHAngleDeg = 104.52;   // degrees
inline constexpr double kMinOO = 2.5;
inline constexpr double kMaxOO = 4.0;
inline constexpr double kMinNonBonded = 1.5;

/// Rigid water monomer, O at the origin, molecule in the xz plane.
Geometry water_monomer();

/// Random water clusters: monomers in random orientations, each new O placed
/// 2.5-4.0 Angstrom from an existing O, no O-O pair below 2.5 and no
/// intermolecular atom pair below 1.5. Structure s uses a seed derived from
/// (seed, s) only.
std::vector<Geometry> generate_clusters(int n_structures, int n_molecules, std::uint64_t seed);

struct Structure {
  Geometry geometry;
  DensityCoefficients coeffs;
};

struct Dataset {
  density::AuxiliaryBasis basis;
  std::vector<Structure> structures;
  std::vector<std::string> provenance;

  std::size_t size() const { return structures.size(); }
  /// Layouts match the basis and provenance is non-empty.
  void validate() const;
};

/// Output of the teacher network before channel scaling.
struct TeacherSettings {
  int l_h = 2;
  int base_scalar_mult = 8;
  int num_layers = 3;
  /// Raw outputs are standardized per l on a fixed calibration set, then a
  /// coefficient of degree l is std0 * decay^l * z, plus bias on l = 0.
  double std0 = 0.8;
  double decay = 0.4;
  double bias = 1.0;
  int calibration_structures = 32;

  friend bool operator==(const TeacherSettings&, const TeacherSettings&) = default;
};

net::ModelConfig teacher_config(const density::AuxiliaryBasis& basis, std::uint64_t teacher_seed,
                                const TeacherSettings& settings = {});

/// Labels each geometry with a fixed, seeded equivariant teacher network. The
/// l = 0 shells get a positive bias and higher l are damped, so coefficient
/// spread falls off with l. Per-l scale factors come from a calibration set
/// drawn from teacher_seed alone, so a structure's labels do not depend on
/// the rest of the batch.
Dataset teacher_targets(const std::vector<Geometry>& geometries, const density::AuxiliaryBasis& basis,
                        std::uint64_t teacher_seed, const TeacherSettings& settings = {});

/// Drops every shell with l > lmax_o from basis and coefficients.
Dataset truncate_dataset(const Dataset& ds, int lmax_o);

/// Population standard deviation of all coefficients of each l, pooled over
/// m, shells, atoms, species and structures.
std::map<int, double> pooled_stds(const Dataset& ds);

/// Multiplies each l > 0 channel by sigma_0 / sigma_l.
Dataset scale_dataset(const Dataset& ds);

/// Seeded permutation; the first round(fraction * n) structures train.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Dataset file, version 1 (see format_dataset for the layout).
std::string format_dataset(const Dataset& ds);
Dataset parse_dataset(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Rotates every geometry about the origin and Wigner-rotates its labels.
Dataset rotate_dataset(const Dataset& ds, const so3::Rotation& r);

}  // namespace densnet::data
