#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "densnet/error.hpp"
#include "densnet/so3.hpp"
#include "support.hpp"

using namespace densnet;
using namespace densnet::so3;
using testing_support::random_unit;

namespace {

constexpr double kPi = std::numbers::pi;

// Textbook real harmonics up to l = 2, m from -l to l, no Condon-Shortley phase.
std::vector<double> closed_form(const Vec3& n) {
  const double x = n.x(), y = n.y(), z = n.z();
  const double c0 = 0.5 / std::sqrt(kPi);
  const double c1 = std::sqrt(3.0 / (4.0 * kPi));
  const double c2 = 0.5 * std::sqrt(15.0 / kPi);
  const double c20 = 0.25 * std::sqrt(5.0 / kPi);
  return {c0,           c1 * y,         c1 * z,         c1 * x,      c2 * x * y, c2 * y * z, c20 * (3 * z * z - 1),
          c2 * x * z, 0.5 * c2 * (x * x - y * y)};
}

}  // namespace

TEST(SphericalHarmonics, ClosedFormValues) {
  const auto y = real_sph_harm(2, Vec3(0, 0, 1));
  EXPECT_NEAR(y[0](0), 0.28209479177387814, 1e-15);
  EXPECT_NEAR(y[1](1), 0.4886025119029199, 1e-15);
  EXPECT_NEAR(y[1](0), 0.0, 1e-15);
  EXPECT_NEAR(y[1](2), 0.0, 1e-15);
  for (int m = 0; m < 5; ++m)
    if (m != 2) EXPECT_NEAR(y[2](m), 0.0, 1e-15);
  EXPECT_GT(y[2](2), 0.0);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vec3 n = random_unit(rng);
    std::vector<double> flat(9);
    real_sph_harm_flat(2, n, flat);
    const auto ref = closed_form(n);
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(flat[static_cast<std::size_t>(k)], ref[static_cast<std::size_t>(k)], 1e-13);
  }
}

TEST(SphericalHarmonics, RejectsNonUnitDirection) {
  EXPECT_THROW(real_sph_harm(2, Vec3(0, 0, 1.001)), Error);
  EXPECT_THROW(real_sph_harm(2, Vec3(0, 0, 0)), Error);
  EXPECT_THROW(real_sph_harm(kMaxL + 1, Vec3(0, 0, 1)), Error);
}

TEST(SphericalHarmonics, SolidHarmonicsScaleAsRToTheL) {
  std::mt19937_64 rng(2);
  const int lmax = 6;
  for (int t = 0; t < 20; ++t) {
    const Vec3 n = random_unit(rng);
    const double r = 0.3 + 2.0 * std::uniform_real_distribution<double>()(rng);
    std::vector<double> solid((lmax + 1) * (lmax + 1)), unit(solid.size());
    solid_harmonics(lmax, r * n.x(), r * n.y(), r * n.z(), solid);
    real_sph_harm_flat(lmax, n, unit);
    for (int l = 0; l <= lmax; ++l)
      for (int k = l * l; k < (l + 1) * (l + 1); ++k)
        EXPECT_NEAR(solid[static_cast<std::size_t>(k)], std::pow(r, l) * unit[static_cast<std::size_t>(k)], 1e-11);
  }
}

// Gauss-Legendre in cos(theta) times a uniform phi rule integrates products
// of degree <= 8 exactly.
TEST(SphericalHarmonics, OrthonormalUnderQuadrature) {
  const int lmax = 4, n_theta = 16, n_phi = 32;
  std::vector<double> x, w;
  testing_support::gauss_legendre(n_theta, x, w);
  const int n = (lmax + 1) * (lmax + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n_theta; ++i)
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * kPi * k / n_phi, s = std::sqrt(1.0 - x[i] * x[i]);
      real_sph_harm_flat(lmax, Vec3(s * std::cos(phi), s * std::sin(phi), x[i]), y);
      const double wt = w[i] * 2.0 * kPi / n_phi;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) gram(a, b) += wt * y[a] * y[b];
    }
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Rotation, ValidatesMatrix) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = -1.0;
  EXPECT_THROW(Rotation{m}, Error);
  m = Mat3::Identity();
  m(0, 1) = 1e-6;
  EXPECT_THROW(Rotation{m}, Error);
}

TEST(Rotation, RandomIsDeterministicAndOrthonormal) {
  const auto a = random_rotation(42), b = random_rotation(42), c = random_rotation(43);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_NE(a.matrix(), c.matrix());
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.matrix().col(k).norm(), 1.0, 1e-12);
  EXPECT_NEAR(a.matrix().determinant(), 1.0, 1e-12);
}

TEST(Rotation, HaarTraceMeanIsZero) {
  std::mt19937_64 rng(3);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += random_rotation(rng).matrix().trace();
  EXPECT_NEAR(sum / n, 0.0, 0.05);
}

TEST(Wigner, IdentityRotation) {
  for (int l = 0; l <= kMaxL; ++l) {
    const auto d = wigner_d(l, Rotation());
    EXPECT_LT((d - Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1)).cwiseAbs().maxCoeff(), 1e-12) << l;
  }
}

TEST(Wigner, DegreeOneIsPermutedRotation) {
  // Components (y, z, x): D = P R P^T with P picking y, z, x.
  Eigen::Matrix3d p;
  p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = random_rotation(s);
    const Eigen::MatrixXd expect = p * r.matrix() * p.transpose();
    EXPECT_LT((wigner_d(1, r) - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Wigner, OrthogonalAndComposes) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto r1 = random_rotation(rng), r2 = random_rotation(rng);
    for (int l = 0; l <= kMaxL; ++l) {
      const auto d1 = wigner_d(l, r1), d2 = wigner_d(l, r2), d12 = wigner_d(l, r1 * r2);
      EXPECT_LT((d1.transpose() * d1 - Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1)).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((d12 - d1 * d2).cwiseAbs().maxCoeff(), 1e-10) << l;
    }
  }
}

TEST(Wigner, RotatesHarmonics) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto r = random_rotation(rng);
    const Vec3 n = random_unit(rng);
    const auto y = real_sph_harm(kMaxL, n), yr = real_sph_harm(kMaxL, r * n);
    for (int l = 0; l <= kMaxL; ++l) EXPECT_LT((yr[l] - wigner_d(l, r) * y[l]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ClebschGordan, ScalarAndDotProduct) {
  const auto& c000 = clebsch_gordan(0, 0, 0);
  ASSERT_EQ(c000.values.size(), 1u);
  EXPECT_NEAR(c000(0, 0, 0), 1.0, 1e-14);

  const auto& c110 = clebsch_gordan(1, 1, 0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(std::abs(c110(a, b, 0)), a == b ? 1.0 / std::sqrt(3.0) : 0.0, 1e-12);
  EXPECT_GT(c110(0, 0, 0), 0.0);
  EXPECT_NEAR(c110(0, 0, 0), c110(2, 2, 0), 1e-12);
}

TEST(ClebschGordan, CrossProductIsLeviCivita) {
  const auto& c = clebsch_gordan(1, 1, 1);
  // In (y, z, x) order the cross product has a fixed sign pattern; compare
  // against epsilon up to the overall sign and the sqrt(3/6) normalization.
  const int perm[3] = {1, 2, 0};  // component index -> Cartesian axis
  const auto eps = [](int i, int j, int k) { return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0; };
  double sign = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int k = 0; k < 3; ++k) {
        const double e = eps(perm[a], perm[b], perm[k]) / std::sqrt(2.0);
        if (e != 0.0 && sign == 0.0) sign = c(a, b, k) / e;
        EXPECT_NEAR(c(a, b, k), (sign == 0.0 ? 1.0 : sign) * e, 1e-12);
      }
  EXPECT_NEAR(std::abs(sign), 1.0, 1e-12);
}

TEST(ClebschGordan, SelectionRuleGivesZero) {
  EXPECT_TRUE(clebsch_gordan(1, 2, 4).is_zero());
  EXPECT_TRUE(clebsch_gordan(3, 0, 2).is_zero());
  EXPECT_TRUE(clebsch_gordan_sparse(1, 2, 4).empty());
  EXPECT_FALSE(clebsch_gordan(2, 2, 4).is_zero());
}

TEST(ClebschGordan, NormalizationAndSparseForm) {
  for (int l1 = 0; l1 <= 4; ++l1)
    for (int l2 = 0; l2 <= 4; ++l2)
      for (int l3 = std::abs(l1 - l2); l3 <= l1 + l2; ++l3) {
        const auto& c = clebsch_gordan(l1, l2, l3);
        double ss = 0.0;
        for (double v : c.values) ss += v * v;
        EXPECT_NEAR(ss, 2 * l3 + 1, 1e-10);
        double sparse_ss = 0.0;
        for (const auto& e : clebsch_gordan_sparse(l1, l2, l3)) {
          EXPECT_EQ(e.value, c(e.m1, e.m2, e.m3));
          sparse_ss += e.value * e.value;
        }
        EXPECT_NEAR(sparse_ss, ss, 1e-12);
      }
}

// Contracting Y_l1(n) Y_l2(n) with C gives a multiple of Y_l3(n) whenever
// l1 + l2 + l3 is even (the product of harmonics projects onto Y_l3).
TEST(ClebschGordan, CouplesHarmonicProductsToHarmonics) {
  std::mt19937_64 rng(6);
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int l2 = 0; l2 <= 3; ++l2)
      for (int l3 = std::abs(l1 - l2); l3 <= l1 + l2; l3 += 2) {
        const auto& c = clebsch_gordan(l1, l2, l3);
        double ratio = NAN;
        for (int t = 0; t < 10; ++t) {
          const auto y = real_sph_harm(6, random_unit(rng));
          Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * l3 + 1);
          for (int a = 0; a < c.n1(); ++a)
            for (int b = 0; b < c.n2(); ++b)
              for (int k = 0; k < c.n3(); ++k) out(k) += c(a, b, k) * y[l1](a) * y[l2](b);
          const double r = out.dot(y[l3]) / y[l3].squaredNorm();
          EXPECT_LT((out - r * y[l3]).cwiseAbs().maxCoeff(), 1e-11);
          if (std::isnan(ratio)) ratio = r;
          EXPECT_NEAR(r, ratio, 1e-10);
        }
        EXPECT_GT(std::abs(ratio), 1e-6) << l1 << l2 << l3;
      }
}

TEST(ClebschGordan, EquivarianceIdentity) {
  std::mt19937_64 rng(7);
  std::vector<Rotation> rs;
  for (int i = 0; i < 20; ++i) rs.push_back(random_rotation(rng));
  for (int l1 = 0; l1 <= 4; ++l1)
    for (int l2 = 0; l2 <= 4; ++l2)
      for (int l3 = 0; l3 <= 4; ++l3) {
        const auto& c = clebsch_gordan(l1, l2, l3);
        for (const auto& r : rs) {
          const auto d1 = wigner_d(l1, r), d2 = wigner_d(l2, r), d3 = wigner_d(l3, r);
          double worst = 0.0;
          for (int a = 0; a < c.n1(); ++a)
            for (int b = 0; b < c.n2(); ++b)
              for (int k = 0; k < c.n3(); ++k) {
                // C(D1 e_a, D2 e_b)_k = (D3 C(e_a, e_b))_k
                double lhs = 0.0, rhs = 0.0;
                for (int a2 = 0; a2 < c.n1(); ++a2)
                  for (int b2 = 0; b2 < c.n2(); ++b2) lhs += c(a2, b2, k) * d1(a2, a) * d2(b2, b);
                for (int k2 = 0; k2 < c.n3(); ++k2) rhs += d3(k, k2) * c(a, b, k2);
                worst = std::max(worst, std::abs(lhs - rhs));
              }
          EXPECT_LT(worst, 1e-9) << l1 << " " << l2 << " " << l3;
        }
      }
}
