#include "densnet/so3.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "densnet/error.hpp"

namespace densnet::so3 {

Rotation::Rotation(const Mat3& m) : m_(m) {
  if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("rotation: matrix is not orthonormal");
  if (m.determinant() < 0.0) throw Error("rotation: determinant is -1 (improper rotation)");
}

Rotation Rotation::operator*(const Rotation& other) const { return Rotation(m_ * other.m_, Unchecked{}); }

Rotation Rotation::inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-8);
  q.normalize();
  return Rotation(q.toRotationMatrix());
}

Rotation random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_rotation(rng);
}

namespace {

constexpr int kTableL = kMaxL;

struct NormTable {
  // sqrt(2)*K_lm for m > 0 and K_l0 for m = 0.
  std::array<std::array<double, kTableL + 1>, kTableL + 1> k{};
  NormTable() {
    for (int l = 0; l <= kTableL; ++l) {
      for (int m = 0; m <= l; ++m) {
        double ratio = 1.0;  // (l-m)!/(l+m)!
        for (int i = l - m + 1; i <= l + m; ++i) ratio /= static_cast<double>(i);
        double v = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
        k[l][m] = m == 0 ? v : std::sqrt(2.0) * v;
      }
    }
  }
};

const NormTable& norms() {
  static const NormTable table;
  return table;
}

}  // namespace

void solid_harmonics(int lmax, double x, double y, double z, std::span<double> out) {
  if (lmax < 0 || lmax > kMaxL) throw Error("solid_harmonics: lmax out of range [0, 8]");
  if (out.size() < static_cast<std::size_t>((lmax + 1) * (lmax + 1)))
    throw Error("solid_harmonics: output buffer too small");
  const auto& k = norms().k;
  const double r2 = x * x + y * y + z * z;

  // q[l][m] = r^(l-m) * P_l^m(z/r) / sin^m(theta), built by the usual
  // three-term recurrence in homogeneous form.
  std::array<std::array<double, kTableL + 1>, kTableL + 1> q{};
  double dfact = 1.0;
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) dfact *= static_cast<double>(2 * m - 1);
    q[m][m] = dfact;
    if (m + 1 <= lmax) q[m + 1][m] = (2.0 * m + 1.0) * z * q[m][m];
    for (int l = m + 2; l <= lmax; ++l)
      q[l][m] = ((2.0 * l - 1.0) * z * q[l - 1][m] - (l + m - 1.0) * r2 * q[l - 2][m]) / (l - m);
  }

  // cos/sin parts: Re and Im of (x + i y)^m.
  std::array<double, kTableL + 1> c{}, s{};
  c[0] = 1.0;
  s[0] = 0.0;
  for (int m = 1; m <= lmax; ++m) {
    c[m] = x * c[m - 1] - y * s[m - 1];
    s[m] = x * s[m - 1] + y * c[m - 1];
  }

  for (int l = 0; l <= lmax; ++l) {
    double* row = out.data() + l * l + l;  // points at m = 0
    row[0] = k[l][0] * q[l][0];
    for (int m = 1; m <= l; ++m) {
      row[m] = k[l][m] * q[l][m] * c[m];
      row[-m] = k[l][m] * q[l][m] * s[m];
    }
  }
}

void real_sph_harm_flat(int lmax, const Vec3& direction, std::span<double> out) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw Error("real_sph_harm: direction is not a unit vector");
  solid_harmonics(lmax, direction.x(), direction.y(), direction.z(), out);
}

std::vector<Eigen::VectorXd> real_sph_harm(int lmax, const Vec3& direction) {
  std::vector<double> flat(static_cast<std::size_t>((lmax + 1) * (lmax + 1)));
  real_sph_harm_flat(lmax, direction, flat);
  std::vector<Eigen::VectorXd> out;
  for (int l = 0; l <= lmax; ++l)
    out.push_back(Eigen::Map<const Eigen::VectorXd>(flat.data() + l * l, 2 * l + 1));
  return out;
}

namespace {

// Generic direction set (Fibonacci lattice) and, per l, the right inverse of
// the matrix of harmonics sampled on it.
struct WignerSolver {
  static constexpr int kPoints = 64;
  std::vector<Vec3> dirs;
  std::vector<Eigen::MatrixXd> right_inverse;  // per l: kPoints x (2l+1)

  WignerSolver() {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kPoints; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / kPoints;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden * i + 0.1;
      dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    std::vector<double> buf((kMaxL + 1) * (kMaxL + 1));
    std::vector<Eigen::MatrixXd> samples;
    for (int l = 0; l <= kMaxL; ++l) samples.emplace_back(2 * l + 1, kPoints);
    for (int p = 0; p < kPoints; ++p) {
      solid_harmonics(kMaxL, dirs[p].x(), dirs[p].y(), dirs[p].z(), buf);
      for (int l = 0; l <= kMaxL; ++l)
        for (int m = 0; m < 2 * l + 1; ++m) samples[l](m, p) = buf[l * l + m];
    }
    for (int l = 0; l <= kMaxL; ++l) {
      const Eigen::MatrixXd& b = samples[l];
      Eigen::MatrixXd gram = b * b.transpose();
      right_inverse.push_back(b.transpose() * gram.ldlt().solve(Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1)));
    }
  }
};

const WignerSolver& wigner_solver() {
  static const WignerSolver solver;
  return solver;
}

}  // namespace

Eigen::MatrixXd wigner_d(int l, const Rotation& r) {
  if (l < 0 || l > kMaxL) throw Error("wigner_d: l out of range [0, 8]");
  const auto& solver = wigner_solver();
  const int n = 2 * l + 1;
  Eigen::MatrixXd rotated(n, WignerSolver::kPoints);
  std::vector<double> buf((l + 1) * (l + 1));
  for (int p = 0; p < WignerSolver::kPoints; ++p) {
    const Vec3 v = r * solver.dirs[p];
    solid_harmonics(l, v.x(), v.y(), v.z(), buf);
    for (int m = 0; m < n; ++m) rotated(m, p) = buf[l * l + m];
  }
  return rotated * solver.right_inverse[l];
}

bool CGArray::is_zero() const {
  for (double v : values)
    if (v != 0.0) return false;
  return true;
}

namespace {

CGArray compute_cg(int l1, int l2, int l3) {
  CGArray cg;
  cg.l1 = l1;
  cg.l2 = l2;
  cg.l3 = l3;
  const int n1 = cg.n1(), n2 = cg.n2(), n3 = cg.n3();
  const int n = n1 * n2 * n3;
  cg.values.assign(static_cast<std::size_t>(n), 0.0);
  if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return cg;

  // Stack the equivariance constraints A_k c = 0 from a few fixed generic
  // rotations into the normal matrix sum A_k^T A_k; c spans its null space.
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a(n, n);
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    const Rotation r = random_rotation(seed);
    const Eigen::MatrixXd d1 = wigner_d(l1, r), d2 = wigner_d(l2, r), d3 = wigner_d(l3, r);
    a.setZero();
    // Row (p1,p2,m3): sum_{m1,m2} c[m1,m2,m3] d1[m1,p1] d2[m2,p2] - sum_k d3[m3,k] c[p1,p2,k].
    for (int p1 = 0; p1 < n1; ++p1)
      for (int p2 = 0; p2 < n2; ++p2)
        for (int m3 = 0; m3 < n3; ++m3) {
          const int row = (p1 * n2 + p2) * n3 + m3;
          for (int m1 = 0; m1 < n1; ++m1)
            for (int m2 = 0; m2 < n2; ++m2) a(row, (m1 * n2 + m2) * n3 + m3) += d1(m1, p1) * d2(m2, p2);
          for (int k = 0; k < n3; ++k) a(row, (p1 * n2 + p2) * n3 + k) -= d3(m3, k);
        }
    normal.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  }
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  if (eig.info() != Eigen::Success) throw Error("clebsch_gordan: eigen-decomposition failed");
  Eigen::VectorXd c = eig.eigenvectors().col(0);
  if (n > 1 && eig.eigenvalues()(1) < 1e-6)
    throw Error("clebsch_gordan: coupling space is not one-dimensional");

  // Snap numerical noise, normalize, fix the sign.
  const double scale = c.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    if (std::abs(c(i)) < 1e-13 * scale) c(i) = 0.0;
  c *= std::sqrt(static_cast<double>(n3)) / c.norm();
  for (int i = 0; i < n; ++i) {
    if (std::abs(c(i)) > 1e-10) {
      if (c(i) < 0) c = -c;
      break;
    }
  }
  for (int i = 0; i < n; ++i) cg.values[static_cast<std::size_t>(i)] = c(i);
  return cg;
}

}  // namespace

const CGArray& clebsch_gordan(int l1, int l2, int l3) {
  if (l1 < 0 || l2 < 0 || l3 < 0 || l1 > kMaxL || l2 > kMaxL || l3 > kMaxL)
    throw Error("clebsch_gordan: l out of range [0, 8]");
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, CGArray> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(l1, l2, l3);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_cg(l1, l2, l3)).first;
  return it->second;
}

const std::vector<CGEntry>& clebsch_gordan_sparse(int l1, int l2, int l3) {
  const CGArray& cg = clebsch_gordan(l1, l2, l3);
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::vector<CGEntry>> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(l1, l2, l3);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<CGEntry> entries;
    for (int a = 0; a < cg.n1(); ++a)
      for (int b = 0; b < cg.n2(); ++b)
        for (int c = 0; c < cg.n3(); ++c)
          if (const double v = cg(a, b, c); v != 0.0) entries.push_back({a, b, c, v});
    it = cache.emplace(key, std::move(entries)).first;
  }
  return it->second;
}

}  // namespace densnet::so3
