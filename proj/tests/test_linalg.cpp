#include <algorithm>
#include <random>

#include "agentinv/linalg.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace agentinv;

TEST_CASE("cubic roots: three distinct, one real, repeated") {
  // (s+1)(s+2)(s+3)
  auto r = real_cubic_roots(1, 6, 11, 6);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-3));
  CHECK(r[1] == doctest::Approx(-2));
  CHECK(r[2] == doctest::Approx(-1));

  // (s-2)(s^2+1)
  r = real_cubic_roots(1, -2, 1, -2);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(2));

  // (s-1)^3
  r = real_cubic_roots(1, -3, 3, -1);
  REQUIRE(r.size() == 3);
  for (double s : r) CHECK(s == doctest::Approx(1).epsilon(1e-5));

  // (s+4)^2 (s-1): the double root must survive round-off in the discriminant.
  r = real_cubic_roots(1, 7, 8, -16);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-4).epsilon(1e-6));
  CHECK(r[1] == doctest::Approx(-4).epsilon(1e-6));
  CHECK(r[2] == doctest::Approx(1));

  // Non-monic leading coefficient.
  r = real_cubic_roots(2, 12, 22, 12);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-3));
}

TEST_CASE("cubic roots agree with the Eigen eigen solver on random matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n = 0; n < 500; ++n) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
    const auto roots = real_cubic_roots(1.0, -trace(m), principal_minor_sum(m), -determinant(m));
    const auto ev = oracle::eigenvalues(oracle::to_eigen(m));
    std::vector<double> want;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(ev[k].imag()) < 1e-9) want.push_back(ev[k].real());
    }
    std::sort(want.begin(), want.end());
    REQUIRE(roots.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(roots[k] == doctest::Approx(want[k]).epsilon(1e-8));
  }
}

TEST_CASE("matrix helpers") {
  Mat3 a;
  a.rows = {{{1, 2, 3}, {4, 5, 6}, {7, 8, 10}}};
  CHECK(trace(a) == 16);
  CHECK(determinant(a) == doctest::Approx(-3));
  CHECK(norm_inf(a) == 25);
  CHECK(a * Mat3::identity() == a);
  const Vec3 u = a * Vec3{1, 0, -1};
  CHECK(u[2] == -3);
  CHECK_THROWS(real_cubic_roots(0, 1, 1, 1));
}
