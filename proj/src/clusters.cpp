#include <cmath>
#include <numbers>
#include <random>

#include "densnet/dataset.hpp"
#include "densnet/error.hpp"

namespace densnet::data {

Geometry water_monomer() {
  const double half = kHOHAngleDeg * std::numbers::pi / 360.0;
  Geometry g;
  g.species = {Species::O, Species::H, Species::H};
  g.positions = {so3::Vec3::Zero(), kOHBond * so3::Vec3(std::sin(half), 0.0, std::cos(half)),
                 kOHBond * so3::Vec3(-std::sin(half), 0.0, std::cos(half))};
  return g;
}

namespace {

constexpr int kMaxAttempts = 2000;

std::uint64_t structure_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Geometry one_cluster(int n_molecules, std::mt19937_64& rng) {
  const Geometry mono = water_monomer();
  Geometry out;
  std::vector<so3::Vec3> oxygens;
  std::uniform_real_distribution<double> dist(kMinOO, kMaxOO);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto place = [&](const so3::Vec3& o, const so3::Rotation& r) {
    for (std::size_t a = 0; a < mono.size(); ++a) {
      out.species.push_back(mono.species[a]);
      out.positions.push_back(o + r * mono.positions[a]);
    }
    oxygens.push_back(o);
  };
  place(so3::Vec3::Zero(), so3::random_rotation(rng));

  for (int m = 1; m < n_molecules; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      std::uniform_int_distribution<std::size_t> pick(0, oxygens.size() - 1);
      const so3::Vec3 anchor = oxygens[pick(rng)];
      so3::Vec3 dir(normal(rng), normal(rng), normal(rng));
      if (dir.norm() < 1e-8) continue;
      dir.normalize();
      const so3::Vec3 o = anchor + dist(rng) * dir;
      const so3::Rotation r = so3::random_rotation(rng);
      bool ok = true;
      for (const auto& other : oxygens) ok = ok && (o - other).norm() >= kMinOO;
      for (std::size_t a = 0; a < mono.size() && ok; ++a) {
        const so3::Vec3 p = o + r * mono.positions[a];
        for (const auto& q : out.positions) ok = ok && (p - q).norm() >= kMinNonBonded;
      }
      if (ok) {
        place(o, r);
        placed = true;
      }
    }
    if (!placed)
      throw Error("generate_clusters: could not place molecule " + std::to_string(m) + " after " +
                  std::to_string(kMaxAttempts) + " attempts");
  }
  return out;
}

}  // namespace

std::vector<Geometry> generate_clusters(int n_structures, int n_molecules, std::uint64_t seed) {
  if (n_molecules < 1) throw Error("generate_clusters: need at least one molecule");
  if (n_structures < 0) throw Error("generate_clusters: negative structure count");
  std::vector<Geometry> out;
  out.reserve(static_cast<std::size_t>(n_structures));
  for (int s = 0; s < n_structures; ++s) {
    std::mt19937_64 rng(structure_seed(seed, static_cast<std::uint64_t>(s)));
    out.push_back(one_cluster(n_molecules, rng));
  }
  return out;
}

}  // namespace densnet::data
