#pragma once

#include <map>
#include <optional>
#include <vector>

#include "densnet/basis.hpp"
#include "densnet/coefficients.hpp"
#include "densnet/geometry.hpp"

namespace densnet::density {

/// Regular axis-aligned grid; point (i,j,k) sits at origin + spacing*(i,j,k).
struct Grid {
  so3::Vec3 origin = so3::Vec3::Zero();
  double spacing = 0.5;
  int nx = 1, ny = 1, nz = 1;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  double cell_volume() const { return spacing * spacing * spacing; }
  so3::Vec3 point(int i, int j, int k) const { return origin + spacing * so3::Vec3(i, j, k); }
  friend bool operator==(const Grid& a, const Grid& b) {
    return a.origin == b.origin && a.spacing == b.spacing && a.nx == b.nx && a.ny == b.ny && a.nz == b.nz;
  }
};

/// Values indexed (i*ny + j)*nz + k.
struct ScalarField {
  Grid grid;
  std::vector<double> values;
};

inline constexpr double kDefaultSpacing = 0.5;
inline constexpr double kDefaultPadding = 4.0;

/// Bounding box of the nuclei grown by `padding` on every side, sampled at
/// `spacing` (the last point reaches or passes the far face).
Grid make_grid(const Geometry& geometry, double spacing = kDefaultSpacing, double padding = kDefaultPadding);

/// rho(r) = sum_atoms sum_shells sum_m C N r^l Y_lm(r^) exp(-alpha r^2),
/// restricted to shells of angular momentum `lmask` when given.
ScalarField evaluate_density(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& coeffs,
                             const Grid& grid, std::optional<int> lmask = std::nullopt);

/// Midpoint-rule integral h^3 sum(values).
double integrate(const ScalarField& field);

/// 100 * int|ref - pred| / int ref, in percent.
double epsilon_total(const ScalarField& ref, const ScalarField& pred);

/// 100 * int|rho^l_ref - rho^l_pred| / int rho_ref (full reference density).
double epsilon_l(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& ref,
                 const DensityCoefficients& pred, const Grid& grid, int l);

struct DensityErrors {
  double total = 0.0;
  std::map<int, double> per_l;
};

/// epsilon_total and every epsilon_l in one pass over the grid.
DensityErrors density_errors(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& ref,
                             const DensityCoefficients& pred, const Grid& grid);

}  // namespace densnet::density
