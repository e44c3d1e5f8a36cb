#include "agentinv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace agentinv {

Mat3 Mat3::identity() {
  Mat3 m;
  for (int i = 0; i < 3; ++i) m(i, i) = 1.0;
  return m;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

Mat3 operator*(double s, const Mat3& a) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = s * a(i, j);
  return c;
}

Vec3 operator*(const Mat3& a, const Vec3& u) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = a(i, 0) * u[0] + a(i, 1) * u[1] + a(i, 2) * u[2];
  return out;
}

double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double principal_minor_sum(const Mat3& a) {
  return (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) + (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) +
         (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1));
}

double norm_inf(const Mat3& a) {
  double best = 0.0;
  for (const auto& row : a.rows) {
    best = std::max(best, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
  }
  return best;
}

namespace {

double polish(double s, double a, double b, double c) {
  // Newton on the monic cubic; keep a step only if it reduces the residual.
  auto f = [&](double z) { return ((z + a) * z + b) * z + c; };
  for (int it = 0; it < 4; ++it) {
    const double fs = f(s);
    const double df = (3.0 * s + 2.0 * a) * s + b;
    if (fs == 0.0 || df == 0.0) break;
    const double next = s - fs / df;
    if (!(std::abs(f(next)) < std::abs(fs))) break;
    s = next;
  }
  return s;
}

}  // namespace

std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3) {
  if (c0 == 0.0) throw std::invalid_argument("leading cubic coefficient is zero");
  const double a = c1 / c0;
  const double b = c2 / c0;
  const double c = c3 / c0;

  // s = t - a/3 gives t^3 + p t + q = 0.
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double scale = std::max({std::abs(a), std::sqrt(std::abs(b)), std::cbrt(std::abs(c)), 1e-300});

  std::vector<double> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (p == 0.0 && q == 0.0) {
    roots = {-shift, -shift, -shift};
  } else if (disc <= 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - shift);
    }
  } else {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 - std::copysign(sq, q));
    const double w = (u == 0.0) ? 0.0 : -p / (3.0 * u);
    const double t1 = u + w;
    roots.push_back(t1 - shift);
    // Conjugate pair -(t1)/2 +- i (sqrt(3)/2)(u - w). A numerically vanishing
    // imaginary part means a double real root lost to round-off.
    const double imag = std::sqrt(3.0) / 2.0 * std::abs(u - w);
    if (imag <= 1e-7 * scale) {
      roots.push_back(-t1 / 2.0 - shift);
      roots.push_back(-t1 / 2.0 - shift);
    }
  }
  for (double& s : roots) s = polish(s, a, b, c);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace agentinv
