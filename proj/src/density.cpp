#include "densnet/density.hpp"

#include <algorithm>
#include <cmath>

#include "densnet/error.hpp"

namespace densnet::density {

Grid make_grid(const Geometry& geometry, double spacing, double padding) {
  if (!(spacing > 0.0)) throw Error("make_grid: spacing must be positive");
  if (padding < 0.0) throw Error("make_grid: padding must be non-negative");
  if (geometry.size() == 0) throw Error("make_grid: geometry has no atoms");
  so3::Vec3 lo = geometry.positions[0], hi = geometry.positions[0];
  for (const auto& p : geometry.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Grid g;
  g.spacing = spacing;
  g.origin = lo - so3::Vec3::Constant(padding);
  const so3::Vec3 extent = hi - lo + so3::Vec3::Constant(2.0 * padding);
  const auto count = [&](double e) { return static_cast<int>(std::ceil(e / spacing - 1e-9)) + 1; };
  g.nx = count(extent.x());
  g.ny = count(extent.y());
  g.nz = count(extent.z());
  return g;
}

namespace {

// Gaussians below exp(-40) relative to their peak are dropped.
constexpr double kMaxExponent = 40.0;

struct AtomTerms {
  so3::Vec3 center;
  const std::vector<Shell>* shells;
  std::vector<double> norms;
  const double* coeffs;
  double min_alpha;
  int lmax;
};

std::vector<AtomTerms> atom_terms(const Geometry& geometry, const AuxiliaryBasis& basis,
                                  const DensityCoefficients& coeffs) {
  std::vector<AtomTerms> atoms;
  for (std::size_t a = 0; a < geometry.size(); ++a) {
    AtomTerms t;
    t.center = geometry.positions[a];
    t.shells = &basis.shells(geometry.species[a]);
    t.coeffs = coeffs.atoms[a].data();
    t.min_alpha = 1e300;
    t.lmax = 0;
    for (const auto& sh : *t.shells) {
      t.norms.push_back(sh.norm());
      t.min_alpha = std::min(t.min_alpha, sh.exponent);
      t.lmax = std::max(t.lmax, sh.l);
    }
    atoms.push_back(std::move(t));
  }
  return atoms;
}

// Calls sink(point_index, l, value) for every shell contribution, where
// `value` is the coefficient-weighted sum over m of that shell at the point.
template <class Sink>
void for_each_contribution(const std::vector<AtomTerms>& atoms, const Grid& grid, std::optional<int> lmask, Sink&& sink) {
  std::vector<double> sh(static_cast<std::size_t>((so3::kMaxL + 1) * (so3::kMaxL + 1)));
  std::size_t index = 0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      for (int k = 0; k < grid.nz; ++k, ++index) {
        const so3::Vec3 r = grid.point(i, j, k);
        for (const auto& atom : atoms) {
          const so3::Vec3 d = r - atom.center;
          const double r2 = d.squaredNorm();
          if (atom.min_alpha * r2 > kMaxExponent) continue;
          so3::solid_harmonics(atom.lmax, d.x(), d.y(), d.z(), sh);
          int offset = 0;
          for (std::size_t s = 0; s < atom.shells->size(); ++s) {
            const Shell& shell = (*atom.shells)[s];
            const int n = 2 * shell.l + 1;
            if ((!lmask || *lmask == shell.l) && shell.exponent * r2 <= kMaxExponent) {
              const double* y = sh.data() + shell.l * shell.l;
              const double* c = atom.coeffs + offset;
              double acc = 0.0;
              for (int m = 0; m < n; ++m) acc += c[m] * y[m];
              sink(index, shell.l, acc * atom.norms[s] * std::exp(-shell.exponent * r2));
            }
            offset += n;
          }
        }
      }
}

}  // namespace

ScalarField evaluate_density(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& coeffs,
                             const Grid& grid, std::optional<int> lmask) {
  check_layout(geometry, basis, coeffs);
  ScalarField field{grid, std::vector<double>(grid.size(), 0.0)};
  for_each_contribution(atom_terms(geometry, basis, coeffs), grid, lmask,
                        [&](std::size_t idx, int, double v) { field.values[idx] += v; });
  return field;
}

double integrate(const ScalarField& field) {
  double s = 0.0;
  for (double v : field.values) s += v;
  return s * field.grid.cell_volume();
}

double epsilon_total(const ScalarField& ref, const ScalarField& pred) {
  if (!(ref.grid == pred.grid) || ref.values.size() != pred.values.size())
    throw Error("epsilon_total: fields live on different grids");
  const double denom = integrate(ref);
  if (!(denom > 0.0)) throw Error("epsilon_total: reference density integrates to a non-positive value");
  double diff = 0.0;
  for (std::size_t i = 0; i < ref.values.size(); ++i) diff += std::abs(ref.values[i] - pred.values[i]);
  return 100.0 * diff * ref.grid.cell_volume() / denom;
}

namespace {

DensityCoefficients difference(const DensityCoefficients& a, const DensityCoefficients& b) {
  DensityCoefficients d = a;
  for (std::size_t i = 0; i < d.atoms.size(); ++i)
    for (std::size_t k = 0; k < d.atoms[i].size(); ++k) d.atoms[i][k] -= b.atoms[i][k];
  return d;
}

}  // namespace

DensityErrors density_errors(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& ref,
                             const DensityCoefficients& pred, const Grid& grid) {
  check_layout(geometry, basis, ref);
  check_layout(geometry, basis, pred);
  // Channel fields are linear in the coefficients, so rho^l_ref - rho^l_pred
  // is the channel-l field of the coefficient difference.
  const DensityCoefficients diff = difference(ref, pred);
  const int lmax = basis.lmax();
  const std::size_t nl = static_cast<std::size_t>(lmax + 1);
  std::vector<double> rho_ref(grid.size(), 0.0);
  std::vector<double> rho_diff(grid.size() * nl, 0.0);
  for_each_contribution(atom_terms(geometry, basis, ref), grid, std::nullopt,
                        [&](std::size_t idx, int, double v) { rho_ref[idx] += v; });
  for_each_contribution(atom_terms(geometry, basis, diff), grid, std::nullopt,
                        [&](std::size_t idx, int l, double v) { rho_diff[idx * nl + static_cast<std::size_t>(l)] += v; });
  const double vol = grid.cell_volume();
  double denom = 0.0;
  for (double v : rho_ref) denom += v;
  denom *= vol;
  if (!(denom > 0.0)) throw Error("density_errors: reference density integrates to a non-positive value");

  DensityErrors out;
  std::vector<double> per_l(nl, 0.0);
  double total = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double sum = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      const double v = rho_diff[p * nl + l];
      per_l[l] += std::abs(v);
      sum += v;
    }
    total += std::abs(sum);
  }
  out.total = 100.0 * total * vol / denom;
  for (int l : basis.ls()) out.per_l[l] = 100.0 * per_l[static_cast<std::size_t>(l)] * vol / denom;
  return out;
}

double epsilon_l(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& ref,
                 const DensityCoefficients& pred, const Grid& grid, int l) {
  bool present = false;
  for (std::size_t a = 0; a < geometry.size(); ++a)
    for (const auto& sh : basis.shells(geometry.species[a])) present = present || sh.l == l;
  if (!present) throw Error("epsilon_l: no shell of l=" + std::to_string(l) + " in the basis for this geometry");
  const ScalarField full_ref = evaluate_density(geometry, basis, ref, grid);
  const ScalarField ref_l = evaluate_density(geometry, basis, ref, grid, l);
  const ScalarField pred_l = evaluate_density(geometry, basis, pred, grid, l);
  const double denom = integrate(full_ref);
  if (!(denom > 0.0)) throw Error("epsilon_l: reference density integrates to a non-positive value");
  double diff = 0.0;
  for (std::size_t i = 0; i < ref_l.values.size(); ++i) diff += std::abs(ref_l.values[i] - pred_l.values[i]);
  return 100.0 * diff * grid.cell_volume() / denom;
}

}  // namespace densnet::density
