#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace densnet::so3 {

inline constexpr int kMaxL = 8;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation (orthonormal, det +1).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  /// Validates orthonormality to 1e-12 and det = +1.
  explicit Rotation(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const;
  Rotation inverse() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Haar-uniform rotation from a seed (random unit quaternion).
Rotation random_rotation(std::uint64_t seed);
Rotation random_rotation(std::mt19937_64& rng);

/// Real solid harmonics r^l Y_lm(r/|r|) for l = 0..lmax, flattened as
/// l*l + (m + l). Orthonormal convention, m from -l to l, no Condon-Shortley
/// phase. Y_{1,-1}, Y_{1,0}, Y_{1,1} are proportional to y, z, x.
void solid_harmonics(int lmax, double x, double y, double z, std::span<double> out);

/// Real spherical harmonics on a unit direction; one vector per l.
std::vector<Eigen::VectorXd> real_sph_harm(int lmax, const Vec3& direction);

/// Flat variant of real_sph_harm, size (lmax+1)^2.
void real_sph_harm_flat(int lmax, const Vec3& direction, std::span<double> out);

/// Matrix D with Y_l(R n) = D Y_l(n).
Eigen::MatrixXd wigner_d(int l, const Rotation& r);

/// Coupling array for l1 (x) l2 -> l3 stored row-major as [m1][m2][m3].
struct CGArray {
  int l1 = 0, l2 = 0, l3 = 0;
  std::vector<double> values;

  int n1() const { return 2 * l1 + 1; }
  int n2() const { return 2 * l2 + 1; }
  int n3() const { return 2 * l3 + 1; }
  double operator()(int m1, int m2, int m3) const {
    return values[(static_cast<std::size_t>(m1) * n2() + m2) * n3() + m3];
  }
  bool is_zero() const;
};

/// Cached, thread-safe. Normalized to sum of squares 2*l3+1; first nonzero
/// entry in lexicographic order is positive; zero when the triangle rule
/// fails.
const CGArray& clebsch_gordan(int l1, int l2, int l3);

struct CGEntry {
  int m1, m2, m3;
  double value;
};

/// Nonzero entries of clebsch_gordan(l1, l2, l3), lexicographic order.
const std::vector<CGEntry>& clebsch_gordan_sparse(int l1, int l2, int l3);

}  // namespace densnet::so3
