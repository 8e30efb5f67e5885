#include "densnet/basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "densnet/error.hpp"
#include "densnet/text_io.hpp"

namespace densnet::density {

double shell_norm(int l, double exponent) {
  const double a = l + 1.5;
  return std::sqrt(2.0 * std::pow(2.0 * exponent, a) / std::tgamma(a));
}

double Shell::norm() const { return shell_norm(l, exponent); }

AuxiliaryBasis::AuxiliaryBasis(std::array<std::vector<Shell>, kNumSpecies> shells) : shells_(std::move(shells)) {
  for (const auto& list : shells_)
    for (const auto& sh : list) {
      if (sh.l < 0 || sh.l > 8) throw Error("basis: shell l must be in [0, 8]");
      if (!(sh.exponent > 0.0) || !std::isfinite(sh.exponent)) throw Error("basis: exponent must be positive");
    }
}

IrrepsSpec AuxiliaryBasis::spec(Species s) const {
  std::vector<MulIrrep> channels;
  for (const auto& sh : shells(s)) {
    if (!channels.empty() && channels.back().irrep.l == sh.l)
      ++channels.back().mul;
    else
      channels.push_back({1, Irrep(sh.l, sh_parity(sh.l))});
  }
  return IrrepsSpec(std::move(channels));
}

int AuxiliaryBasis::dim(Species s) const {
  int d = 0;
  for (const auto& sh : shells(s)) d += 2 * sh.l + 1;
  return d;
}

int AuxiliaryBasis::lmax() const {
  int l = -1;
  for (const auto& list : shells_)
    for (const auto& sh : list) l = std::max(l, sh.l);
  return l;
}

std::vector<int> AuxiliaryBasis::ls() const {
  std::set<int> s;
  for (const auto& list : shells_)
    for (const auto& sh : list) s.insert(sh.l);
  return {s.begin(), s.end()};
}

AuxiliaryBasis AuxiliaryBasis::truncated(int lmax) const {
  if (lmax < 0) throw Error("basis: truncation lmax must be >= 0");
  std::array<std::vector<Shell>, kNumSpecies> out;
  for (std::size_t s = 0; s < shells_.size(); ++s) {
    for (const auto& sh : shells_[s])
      if (sh.l <= lmax) out[s].push_back(sh);
    if (!shells_[s].empty() && out[s].empty()) throw Error("basis: truncation leaves a species without shells");
  }
  return AuxiliaryBasis(std::move(out));
}

namespace {

void even_tempered(std::vector<Shell>& out, int l, int count, double lo, double hi) {
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out.push_back({l, lo * std::pow(hi / lo, t)});
  }
}

}  // namespace

AuxiliaryBasis synthetic_basis() {
  std::array<std::vector<Shell>, kNumSpecies> shells;
  auto& h = shells[static_cast<std::size_t>(species_index(Species::H))];
  even_tempered(h, 0, 4, 0.15, 2.5);
  even_tempered(h, 1, 2, 0.3, 1.2);
  even_tempered(h, 2, 1, 0.6, 0.6);
  auto& o = shells[static_cast<std::size_t>(species_index(Species::O))];
  even_tempered(o, 0, 12, 0.15, 4.0);
  even_tempered(o, 1, 5, 0.2, 3.0);
  even_tempered(o, 2, 4, 0.25, 2.5);
  even_tempered(o, 3, 2, 0.4, 1.2);
  even_tempered(o, 4, 1, 0.8, 0.8);
  return AuxiliaryBasis(std::move(shells));
}

AuxiliaryBasis parse_basis(const std::string& text) {
  std::array<std::vector<Shell>, kNumSpecies> shells;
  const auto lines = content_lines(text);
  if (lines.empty()) throw Error("basis: no shells defined");
  for (const auto& [number, line] : lines) {
    const auto tok = split_tokens(line);
    const auto where = " (line " + std::to_string(number) + ")";
    if (tok.size() != 3) throw Error("basis: expected 'species l exponent'" + where);
    Species s;
    try {
      s = parse_species(tok[0]);
    } catch (const Error& e) {
      throw Error(std::string("basis: ") + e.what() + where);
    }
    const long long l = parse_integer(tok[1]);
    const double alpha = parse_double(tok[2]);
    if (l < 0 || l > 8) throw Error("basis: l out of range" + where);
    if (!(alpha > 0.0)) throw Error("basis: exponent must be positive" + where);
    shells[static_cast<std::size_t>(species_index(s))].push_back({static_cast<int>(l), alpha});
  }
  return AuxiliaryBasis(std::move(shells));
}

std::string format_basis(const AuxiliaryBasis& basis) {
  std::string s = "# species l exponent(1/Angstrom^2)\n";
  for (Species sp : {Species::H, Species::O})
    for (const auto& sh : basis.shells(sp))
      s += species_name(sp) + " " + std::to_string(sh.l) + " " + format_double(sh.exponent) + "\n";
  return s;
}

AuxiliaryBasis load_basis(const std::string& path) { return parse_basis(read_text_file(path)); }

void save_basis(const AuxiliaryBasis& basis, const std::string& path) { write_text_file(path, format_basis(basis)); }

void check_layout(const Geometry& geometry, const AuxiliaryBasis& basis, const DensityCoefficients& coeffs) {
  if (coeffs.atoms.size() != geometry.size())
    throw Error("coefficients: " + std::to_string(coeffs.atoms.size()) + " atoms, geometry has " +
                std::to_string(geometry.size()));
  for (std::size_t a = 0; a < geometry.size(); ++a) {
    const Species s = geometry.species[a];
    if (!basis.has_species(s)) throw Error("coefficients: basis has no shells for " + species_name(s));
    if (coeffs.atoms[a].size() != static_cast<std::size_t>(basis.dim(s)))
      throw Error("coefficients: atom " + std::to_string(a) + " has " + std::to_string(coeffs.atoms[a].size()) +
                  " values, basis expects " + std::to_string(basis.dim(s)));
  }
}

}  // namespace densnet::density
