#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "densnet/dataset.hpp"
#include "densnet/error.hpp"
#include "densnet/features.hpp"
#include "densnet/text_io.hpp"

namespace densnet::data {

namespace {

std::string clean_line(std::string s) {
  for (char& c : s)
    if (c == '#' || c == '\n' || c == '\r') c = ' ';
  return s;
}

/// Visits every coefficient with its l.
template <class Coeffs, class F>
void for_each_coefficient(const density::AuxiliaryBasis& basis, const Geometry& g, Coeffs& c, F&& f) {
  for (std::size_t a = 0; a < g.size(); ++a) {
    int offset = 0;
    for (const auto& shell : basis.shells(g.species[a])) {
      const int n = 2 * shell.l + 1;
      for (int k = 0; k < n; ++k) f(shell.l, c.atoms[a][static_cast<std::size_t>(offset + k)]);
      offset += n;
    }
  }
}

}  // namespace

void Dataset::validate() const {
  if (provenance.empty()) throw Error("dataset: empty provenance");
  for (const auto& s : structures) {
    s.geometry.validate();
    density::check_layout(s.geometry, basis, s.coeffs);
  }
}

net::ModelConfig teacher_config(const density::AuxiliaryBasis& basis, std::uint64_t teacher_seed,
                                const TeacherSettings& settings) {
  net::ModelConfig c;
  c.num_layers = settings.num_layers;
  c.hidden_spec = hidden_config(settings.l_h, settings.base_scalar_mult);
  for (int s = 0; s < kNumSpecies; ++s) c.output_spec[static_cast<std::size_t>(s)] = basis.spec(static_cast<Species>(s));
  c.seed = teacher_seed;
  return c;
}

Dataset teacher_targets(const std::vector<Geometry>& geometries, const density::AuxiliaryBasis& basis,
                        std::uint64_t teacher_seed, const TeacherSettings& settings) {
  if (settings.calibration_structures < 2) throw Error("teacher_targets: calibration set too small");
  const net::Model teacher(teacher_config(basis, teacher_seed, settings));

  Dataset calib;
  calib.basis = basis;
  for (const auto& g : generate_clusters(settings.calibration_structures, 3, teacher_seed ^ 0x5DEECE66DULL))
    calib.structures.push_back({g, teacher.forward(g)});
  const auto stds = pooled_stds(calib);
  std::map<int, double> mean;
  std::map<int, long> count;
  for (const auto& s : calib.structures)
    for_each_coefficient(basis, s.geometry, s.coeffs, [&](int l, double v) {
      mean[l] += v;
      ++count[l];
    });
  for (auto& [l, m] : mean) m /= static_cast<double>(count[l]);

  Dataset ds;
  ds.basis = basis;
  ds.structures.reserve(geometries.size());
  for (const auto& g : geometries) {
    g.validate();
    Structure s{g, teacher.forward(g)};
    for_each_coefficient(basis, s.geometry, s.coeffs, [&](int l, double& v) {
      const double z = l == 0 ? (v - mean.at(0)) / stds.at(0) : v / stds.at(l);
      v = settings.std0 * std::pow(settings.decay, l) * z + (l == 0 ? settings.bias : 0.0);
    });
    ds.structures.push_back(std::move(s));
  }
  std::ostringstream p;
  p << "teacher seed=" << teacher_seed << " hidden=" << teacher.config().hidden_spec.str()
    << " layers=" << settings.num_layers << " std0=" << format_double(settings.std0)
    << " decay=" << format_double(settings.decay) << " bias=" << format_double(settings.bias)
    << " calibration=" << settings.calibration_structures << " structures=" << geometries.size();
  ds.provenance.push_back(p.str());
  return ds;
}

Dataset truncate_dataset(const Dataset& ds, int lmax_o) {
  if (lmax_o < 0) throw Error("truncate_dataset: lmax_o must be >= 0");
  Dataset out;
  out.basis = ds.basis.truncated(lmax_o);
  out.provenance = ds.provenance;
  out.provenance.push_back("truncate lmax_o=" + std::to_string(lmax_o));
  out.structures.reserve(ds.size());
  for (const auto& s : ds.structures) {
    Structure t{s.geometry, {}};
    t.coeffs.atoms.resize(s.geometry.size());
    for (std::size_t a = 0; a < s.geometry.size(); ++a) {
      int offset = 0;
      for (const auto& shell : ds.basis.shells(s.geometry.species[a])) {
        const int n = 2 * shell.l + 1;
        if (shell.l <= lmax_o)
          t.coeffs.atoms[a].insert(t.coeffs.atoms[a].end(), s.coeffs.atoms[a].begin() + offset,
                                   s.coeffs.atoms[a].begin() + offset + n);
        offset += n;
      }
    }
    out.structures.push_back(std::move(t));
  }
  return out;
}

std::map<int, double> pooled_stds(const Dataset& ds) {
  std::map<int, std::pair<double, long>> mean;
  for (const auto& s : ds.structures)
    for_each_coefficient(ds.basis, s.geometry, s.coeffs, [&](int l, double v) {
      mean[l].first += v;
      ++mean[l].second;
    });
  std::map<int, double> var;
  for (const auto& s : ds.structures)
    for_each_coefficient(ds.basis, s.geometry, s.coeffs, [&](int l, double v) {
      const auto& [sum, n] = mean[l];
      const double d = v - sum / static_cast<double>(n);
      var[l] += d * d;
    });
  std::map<int, double> out;
  for (const auto& [l, v] : var) out[l] = std::sqrt(v / static_cast<double>(mean[l].second));
  return out;
}

Dataset scale_dataset(const Dataset& ds) {
  const auto stds = pooled_stds(ds);
  const auto it0 = stds.find(0);
  if (it0 == stds.end() || !(it0->second > 0.0)) throw Error("scale_dataset: l=0 channel has zero spread");
  std::map<int, double> factor;
  std::ostringstream p;
  p << "scale per-l pooled std, sigma0=" << format_double(it0->second);
  for (const auto& [l, sd] : stds) {
    if (l == 0) continue;
    if (!(sd > 0.0)) throw Error("scale_dataset: zero spread for l=" + std::to_string(l));
    factor[l] = it0->second / sd;
    p << " l" << l << "x" << format_double(factor[l]);
  }
  Dataset out = ds;
  for (auto& s : out.structures)
    for_each_coefficient(out.basis, s.geometry, s.coeffs, [&](int l, double& v) {
      if (l > 0) v *= factor[l];
    });
  out.provenance.push_back(p.str());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw Error("split: fraction must be in [0, 1]");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with an explicit draw so the permutation is library-independent.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size())));
  Dataset train, test;
  train.basis = test.basis = ds.basis;
  train.provenance = test.provenance = ds.provenance;
  const std::string tag = "split fraction=" + format_double(train_fraction) + " seed=" + std::to_string(seed);
  train.provenance.push_back(tag + " part=train");
  test.provenance.push_back(tag + " part=test");
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_train ? train : test).structures.push_back(ds.structures[order[k]]);
  return {std::move(train), std::move(test)};
}

Dataset rotate_dataset(const Dataset& ds, const so3::Rotation& r) {
  Dataset out = ds;
  for (auto& s : out.structures) {
    for (std::size_t a = 0; a < s.geometry.size(); ++a)
      s.coeffs.atoms[a] = net::rotate_irreps(ds.basis.spec(s.geometry.species[a]), s.coeffs.atoms[a], r);
    s.geometry = s.geometry.rotated(r);
  }
  return out;
}

// Layout:
//   densnet-dataset 1
//   basis <n>            followed by n lines `species l exponent`
//   provenance <text>    any number
//   structures <n>
//   structure <natoms>   then natoms lines `species x y z c...`
//   end
std::string format_dataset(const Dataset& ds) {
  std::string out = "densnet-dataset 1\n";
  std::size_t n_shells = 0;
  for (int s = 0; s < kNumSpecies; ++s) n_shells += ds.basis.shells(static_cast<Species>(s)).size();
  out += "basis " + std::to_string(n_shells) + "\n";
  for (int s = 0; s < kNumSpecies; ++s)
    for (const auto& shell : ds.basis.shells(static_cast<Species>(s)))
      out += species_name(static_cast<Species>(s)) + " " + std::to_string(shell.l) + " " +
             format_double(shell.exponent) + "\n";
  for (const auto& p : ds.provenance) out += "provenance " + clean_line(p) + "\n";
  out += "structures " + std::to_string(ds.size()) + "\n";
  for (const auto& s : ds.structures) {
    out += "structure " + std::to_string(s.geometry.size()) + "\n";
    for (std::size_t a = 0; a < s.geometry.size(); ++a) {
      out += species_name(s.geometry.species[a]);
      for (int k = 0; k < 3; ++k) out += " " + format_double(s.geometry.positions[a][k]);
      for (double v : s.coeffs.atoms[a]) out += " " + format_double(v);
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

Dataset parse_dataset(const std::string& text) {
  const auto lines = content_lines(text);
  std::size_t pos = 0;
  const auto fail = [&](const std::string& what) -> Error {
    const int line = pos < lines.size() ? lines[pos].first : (lines.empty() ? 0 : lines.back().first);
    return Error("dataset line " + std::to_string(line) + ": " + what);
  };
  const auto next = [&]() -> std::vector<std::string_view> {
    if (pos >= lines.size()) throw fail("unexpected end of file");
    return split_tokens(lines[pos].second);
  };
  auto head = next();
  if (head.size() != 2 || head[0] != "densnet-dataset") throw fail("missing header");
  if (head[1] != "1") throw fail("unsupported version " + std::string(head[1]));
  ++pos;

  auto tok = next();
  if (tok.size() != 2 || tok[0] != "basis") throw fail("expected basis");
  const auto n_shells = parse_integer(tok[1]);
  ++pos;
  std::string basis_text;
  for (long long k = 0; k < n_shells; ++k, ++pos) {
    if (pos >= lines.size()) throw fail("truncated basis");
    basis_text += std::string(lines[pos].second) + "\n";
  }
  Dataset ds;
  ds.basis = density::parse_basis(basis_text);

  while (true) {
    tok = next();
    if (tok.empty() || tok[0] != "provenance") break;
    const auto line = lines[pos].second;
    const auto at = line.find("provenance") + std::string_view("provenance").size();
    auto rest = line.substr(at);
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
    while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.remove_suffix(1);
    ds.provenance.emplace_back(rest);
    ++pos;
  }
  if (tok.size() != 2 || tok[0] != "structures") throw fail("expected structures");
  const auto n_structures = parse_integer(tok[1]);
  if (n_structures < 0) throw fail("negative structure count");
  ++pos;
  for (long long s = 0; s < n_structures; ++s) {
    tok = next();
    if (tok.size() != 2 || tok[0] != "structure") throw fail("expected structure");
    const auto n_atoms = parse_integer(tok[1]);
    ++pos;
    Structure st;
    for (long long a = 0; a < n_atoms; ++a, ++pos) {
      tok = next();
      if (tok.size() < 4) throw fail("atom line needs species and xyz");
      const Species sp = parse_species(tok[0]);
      st.geometry.species.push_back(sp);
      st.geometry.positions.emplace_back(parse_double(tok[1]), parse_double(tok[2]), parse_double(tok[3]));
      std::vector<double> c;
      for (std::size_t k = 4; k < tok.size(); ++k) c.push_back(parse_double(tok[k]));
      if (static_cast<int>(c.size()) != ds.basis.dim(sp))
        throw fail("expected " + std::to_string(ds.basis.dim(sp)) + " coefficients, got " + std::to_string(c.size()));
      st.coeffs.atoms.push_back(std::move(c));
    }
    ds.structures.push_back(std::move(st));
  }
  tok = next();
  if (tok.size() != 1 || tok[0] != "end") throw fail("expected end");
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) { write_text_file(path, format_dataset(ds)); }

Dataset load_dataset(const std::string& path) { return parse_dataset(read_text_file(path)); }

}  // namespace densnet::data
