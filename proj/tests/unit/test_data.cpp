#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <unistd.h>

#include "densnet/dataset.hpp"
#include "densnet/error.hpp"
#include "densnet/text_io.hpp"
#include "support.hpp"

using namespace densnet;
using namespace densnet::data;

namespace {

Dataset small_teacher_set(int n = 12, std::uint64_t seed = 3) {
  return teacher_targets(generate_clusters(n, 2, seed), density::synthetic_basis(), 77);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("densnet_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Clusters, SingleMoleculeIsTheMonomer) {
  const auto g = generate_clusters(1, 1, 5)[0];
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.species, (std::vector<Species>{Species::O, Species::H, Species::H}));
  const auto oh1 = g.positions[1] - g.positions[0], oh2 = g.positions[2] - g.positions[0];
  EXPECT_NEAR(oh1.norm(), 0.9572, 1e-12);
  EXPECT_NEAR(oh2.norm(), 0.9572, 1e-12);
  EXPECT_NEAR(std::acos(oh1.dot(oh2) / (oh1.norm() * oh2.norm())) * 180 / std::numbers::pi, 104.52, 1e-9);
}

TEST(Clusters, DeterministicPerSeed) {
  const auto a = generate_clusters(5, 3, 9), b = generate_clusters(5, 3, 9), c = generate_clusters(5, 3, 10);
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a[s].positions, b[s].positions);
  EXPECT_NE(a[0].positions, c[0].positions);
  // Structure s does not depend on how many come after it.
  EXPECT_EQ(generate_clusters(2, 3, 9)[1].positions, a[1].positions);
  EXPECT_THROW(generate_clusters(1, 0, 1), Error);
}

TEST(Clusters, DistanceConstraintsOnHundredStructures) {
  const int n_mol = 4;
  for (const auto& g : generate_clusters(100, n_mol, 12)) {
    ASSERT_EQ(g.size(), static_cast<std::size_t>(3 * n_mol));
    for (int m = 0; m < n_mol; ++m) {
      double nearest = INFINITY;
      for (int k = 0; k < n_mol; ++k) {
        if (k == m) continue;
        const double d = (g.positions[3 * m] - g.positions[3 * k]).norm();
        EXPECT_GE(d, 2.5);
        nearest = std::min(nearest, d);
      }
      EXPECT_LE(nearest, 4.0);
    }
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j)
        if (i / 3 != j / 3) EXPECT_GE((g.positions[i] - g.positions[j]).norm(), 1.5);
    EXPECT_GT(g.min_distance(), 0.5);
  }
}

TEST(Teacher, DeterministicAndEquivariant) {
  const auto geoms = generate_clusters(3, 2, 4);
  const auto basis = density::synthetic_basis();
  const auto a = teacher_targets(geoms, basis, 5), b = teacher_targets(geoms, basis, 5);
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a.structures[s].coeffs, b.structures[s].coeffs);
  EXPECT_FALSE(a.provenance.empty());
  a.validate();

  const std::array<IrrepsSpec, 2> specs = {basis.spec(Species::H), basis.spec(Species::O)};
  std::mt19937_64 rng(6);
  for (const auto& g : geoms) {
    const auto r = so3::random_rotation(rng);
    const auto plain = teacher_targets({g}, basis, 5).structures[0].coeffs;
    const auto rotated = teacher_targets({g.rotated(r)}, basis, 5).structures[0].coeffs;
    EXPECT_LT(testing_support::max_abs_diff(rotated, testing_support::rotate_coeffs(specs, g, plain, r)), 1e-9);
  }
}

TEST(Teacher, SpreadDecreasesWithDegree) {
  const auto ds = teacher_targets(generate_clusters(100, 3, 8), density::synthetic_basis(), 9);
  const auto stds = pooled_stds(ds);
  ASSERT_EQ(stds.size(), 5u);
  for (int l = 1; l <= 4; ++l) EXPECT_LT(stds.at(l), stds.at(l - 1)) << l;
}

TEST(Truncate, ExperimentTwoLayouts) {
  const auto ds = small_teacher_set(4);
  const char* expect[] = {"12x0e", "12x0e+5x1o", "12x0e+5x1o+4x2e", "12x0e+5x1o+4x2e+2x3o",
                          "12x0e+5x1o+4x2e+2x3o+1x4e"};
  for (int l = 0; l <= 4; ++l) {
    const auto t = truncate_dataset(ds, l);
    EXPECT_EQ(t.basis.spec(Species::O).str(), expect[l]);
    t.validate();
    for (std::size_t s = 0; s < ds.size(); ++s)
      for (std::size_t a = 0; a < ds.structures[s].geometry.size(); ++a) {
        const auto& full = ds.structures[s].coeffs.atoms[a];
        const auto& cut = t.structures[s].coeffs.atoms[a];
        // Shells are ordered by l, so the truncated vector is a prefix.
        ASSERT_LE(cut.size(), full.size());
        EXPECT_TRUE(std::equal(cut.begin(), cut.end(), full.begin()));
        int removed = 0;
        for (const auto& c : ds.basis.spec(ds.structures[s].geometry.species[a]))
          if (c.irrep.l > l) removed += c.dim();
        EXPECT_EQ(cut.size() + static_cast<std::size_t>(removed), full.size());
      }
  }
  const auto same = truncate_dataset(ds, 4);
  for (std::size_t s = 0; s < ds.size(); ++s) EXPECT_EQ(same.structures[s].coeffs, ds.structures[s].coeffs);
  EXPECT_GT(same.provenance.size(), ds.provenance.size());
  EXPECT_THROW(truncate_dataset(ds, -1), Error);
}

TEST(Scale, MatchesScalarSpreadAndIsIdempotent) {
  const auto ds = small_teacher_set(10);
  const auto scaled = scale_dataset(ds);
  const auto stds = pooled_stds(scaled);
  for (const auto& [l, sd] : stds) EXPECT_NEAR(sd, stds.at(0), 1e-12) << l;
  const auto twice = scale_dataset(scaled);
  for (std::size_t s = 0; s < ds.size(); ++s)
    EXPECT_LT(testing_support::max_abs_diff(twice.structures[s].coeffs, scaled.structures[s].coeffs), 1e-12);
  EXPECT_EQ(scaled.structures[0].coeffs.atoms[0][0], ds.structures[0].coeffs.atoms[0][0]);
}

TEST(Scale, MultiplierIsRatioOfSpreads) {
  // O-only basis 1x0e+1x1o; l=0 values +-0.8 (std 0.8), l=1 values +-0.1 (std 0.1).
  Dataset ds;
  ds.basis = density::AuxiliaryBasis({std::vector<density::Shell>{}, std::vector<density::Shell>{{0, 1.0}, {1, 1.0}}});
  ds.provenance = {"hand built"};
  for (double sign : {1.0, -1.0}) {
    Structure s;
    s.geometry.species = {Species::O};
    s.geometry.positions = {so3::Vec3::Zero()};
    s.coeffs.atoms = {{0.8 * sign, 0.1 * sign, -0.1 * sign, 0.1 * sign}};
    ds.structures.push_back(s);
  }
  const auto scaled = scale_dataset(ds);
  EXPECT_NEAR(scaled.structures[0].coeffs.atoms[0][1] / ds.structures[0].coeffs.atoms[0][1], 8.0, 1e-12);

  Dataset flat = ds;
  for (auto& s : flat.structures) s.coeffs.atoms[0][1] = s.coeffs.atoms[0][2] = s.coeffs.atoms[0][3] = 0.0;
  EXPECT_THROW(scale_dataset(flat), Error);
  Dataset flat0 = ds;
  for (auto& s : flat0.structures) s.coeffs.atoms[0][0] = 0.3;
  EXPECT_THROW(scale_dataset(flat0), Error);
}

TEST(Split, PartitionsAndIsSeeded) {
  const auto ds = small_teacher_set(10);
  const auto [train, test] = split(ds, 0.7, 4);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(test.size(), 3u);
  std::vector<std::vector<so3::Vec3>> seen;
  for (const auto* part : {&train, &test})
    for (const auto& s : part->structures) seen.push_back(s.geometry.positions);
  for (const auto& s : ds.structures)
    EXPECT_EQ(std::count(seen.begin(), seen.end(), s.geometry.positions), 1);
  const auto again = split(ds, 0.7, 4);
  EXPECT_EQ(again.first.structures[0].geometry.positions, train.structures[0].geometry.positions);
  const auto all = split(ds, 1.0, 4);
  EXPECT_EQ(all.first.size(), ds.size());
  EXPECT_EQ(all.second.size(), 0u);
  EXPECT_THROW(split(ds, 1.5, 4), Error);
}

TEST(DatasetFile, RoundTripIsBitExact) {
  auto ds = scale_dataset(small_teacher_set(3));
  ds.structures[0].coeffs.atoms[0][0] = 0.1 + 0.2;  // not representable in short decimal
  const auto back = parse_dataset(format_dataset(ds));
  EXPECT_EQ(back.basis, ds.basis);
  EXPECT_EQ(back.provenance, ds.provenance);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t s = 0; s < ds.size(); ++s) {
    EXPECT_EQ(back.structures[s].coeffs, ds.structures[s].coeffs);
    EXPECT_EQ(back.structures[s].geometry.positions, ds.structures[s].geometry.positions);
    EXPECT_EQ(back.structures[s].geometry.species, ds.structures[s].geometry.species);
  }
  for (const char* ext : {".txt", ".gz"}) {
    const auto path = temp_path(std::string("ds") + ext);
    save_dataset(ds, path.string());
    const auto loaded = load_dataset(path.string());
    EXPECT_EQ(loaded.structures.back().coeffs, ds.structures.back().coeffs);
    std::filesystem::remove(path);
  }
}

TEST(DatasetFile, RejectsBadInput) {
  const auto text = format_dataset(small_teacher_set(2));
  EXPECT_THROW(parse_dataset(""), Error);
  EXPECT_THROW(parse_dataset("densnet-dataset 2\n"), Error);
  EXPECT_THROW(parse_dataset(text.substr(0, text.size() / 2)), Error);
  std::string wrong = text;
  wrong.replace(wrong.find("\nO "), 3, "\nC ");
  EXPECT_THROW(parse_dataset(wrong), Error);
  EXPECT_THROW(load_dataset("/nonexistent/densnet.dataset"), Error);
}
