#pragma once

#include <array>
#include <vector>

namespace agentinv {

using Vec3 = std::array<double, 3>;

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<Vec3, 3> rows{};

  double& operator()(int i, int j) { return rows[i][j]; }
  double operator()(int i, int j) const { return rows[i][j]; }

  static Mat3 identity();

  friend Mat3 operator+(const Mat3& a, const Mat3& b);
  friend Mat3 operator-(const Mat3& a, const Mat3& b);
  friend Mat3 operator*(const Mat3& a, const Mat3& b);
  friend Mat3 operator*(double s, const Mat3& a);
  friend Vec3 operator*(const Mat3& a, const Vec3& u);
  friend bool operator==(const Mat3&, const Mat3&) = default;
};

double trace(const Mat3& a);
double determinant(const Mat3& a);
/// Sum of the three principal 2x2 minors.
double principal_minor_sum(const Mat3& a);
/// Maximum absolute row sum.
double norm_inf(const Mat3& a);

/// Real roots of c0 s^3 + c1 s^2 + c2 s + c3 with c0 != 0, ascending, repeated
/// roots listed once per multiplicity. Closed form (trigonometric for three
/// real roots, Cardano otherwise) followed by Newton polishing.
std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3);

}  // namespace agentinv
