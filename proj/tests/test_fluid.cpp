#include <cmath>

#include "agentinv/fluid.hpp"
#include "agentinv/stability.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace agentinv;

namespace {

ModelParams example1() {
  return {.lambda = 2.0, .r = 1000, .alpha = 0.5, .beta = 3.0, .mu = 2.0,
          .delta = 1.0, .theta = 0.1, .gamma = 1.0, .epsilon = 1.5};
}

ModelParams example2(double gamma) {
  return {.lambda = 2.0, .r = 1000, .alpha = 0.9, .beta = 0.05, .mu = 0.5,
          .delta = 0.01, .theta = 0.01, .gamma = gamma, .epsilon = 1.0};
}

FluidState centered(double X, double Y, double Z, const ModelParams& p) {
  SimState s;
  s.X = static_cast<std::int64_t>(X);
  s.Y = static_cast<std::int64_t>(Y);
  s.Z = static_cast<std::int64_t>(Z);
  return to_centered(s, p);
}

Eigen::Vector3d vec(const FluidState& s) { return {s.x, s.y, s.v}; }

}  // namespace

TEST_CASE("vector fields") {
  const auto p = example1();
  const auto z = rhs_unbounded({0, 0, 0}, p);
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
  CHECK(z.v == 0.0);

  // Interior points agree with the free system.
  const FluidState in{0.4, -0.2, 0.3};
  const auto a = rhs_bounded(in, p);
  const auto b = rhs_unbounded(in, p);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.v == b.v);

  // Each regime's field is its matrix times the state.
  oracle::ParamSampler sampler(31);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 500; ++i) {
    const auto q = sampler.draw();
    const FluidState s{u(sampler.engine()), u(sampler.engine()), u(sampler.engine())};
    const Eigen::Vector3d want = oracle::regime_matrix(q, s.y >= 0) * vec(s);
    const auto got = rhs_unbounded(s, q);
    CHECK((vec(got) - want).norm() <= 1e-12 * (1 + want.norm()));
  }

  // Boundary points with positive drift keep it.
  const double xb = p.x_boundary();
  const auto up = rhs_bounded({xb, 1.0, 0.0}, p);
  CHECK(up.x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(up.y == doctest::Approx(-2.1).epsilon(1e-12));
  const auto dn = rhs_bounded({xb, -1.0, 0.0}, p);
  CHECK(dn.x == doctest::Approx(1.5).epsilon(1e-12));

  // Downward drift is clipped on the boundary.
  const auto clip = rhs_bounded({xb, 0.0, 2.0}, p);
  CHECK(rhs_unbounded({xb, 0.0, 2.0}, p).x < 0.0);
  CHECK(clip.x == 0.0);
  CHECK(on_boundary({xb + 1e-12, 0, 0}, p));

  CHECK_THROWS_AS(rhs_bounded({xb - 0.1, 0, 0}, p), ModelError);
}

TEST_CASE("equilibrium trajectory") {
  FluidConfig cfg;
  cfg.T = 20.0;
  const auto tr = integrate({0, 0, 0}, example1(), cfg);
  CHECK(tr.size() == 20001);
  for (const auto& s : tr.states) CHECK(s.norm() == 0.0);
  const auto v = detect_convergence(tr, cfg);
  CHECK(v.converged);
  REQUIRE(v.t_conv);
  CHECK(*v.t_conv == 0.0);
  CHECK_FALSE(decay_envelope(tr));
}

TEST_CASE("configuration is validated") {
  FluidConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(integrate({0, 0, 0}, example1(), cfg), ModelError);
  cfg = FluidConfig{};
  CHECK_THROWS_AS(integrate({-5, 0, 0}, example1(), cfg), ModelError);
}

TEST_CASE("first example converges from the published initial states") {
  const auto p = example1();
  FluidConfig cfg;
  const double ics[4][3] = {{0, 0, 0}, {0, 2000, 0}, {2000, -2000, 1000}, {2000, 4000, 1000}};
  for (int k = 0; k < 4; ++k) {
    const auto tr = integrate(centered(ics[k][0], ics[k][1], ics[k][2], p), p, cfg);
    CHECK(tr.kind == TrajectoryKind::fluid_bounded);
    const auto v = detect_convergence(tr, cfg);
    CHECK(v.converged);
    if (k == 1 || k == 3) CHECK(boundary_contacts(tr, p) >= 1);
    for (const auto& s : tr.states) CHECK(s.x >= p.x_boundary() - 1e-12);
  }
}

TEST_CASE("second example with unit gain never settles") {
  const auto p = example2(1.0);
  FluidConfig cfg;
  cfg.T = 200.0;
  const auto tr = integrate(centered(1000, 6000, 2000, p), p, cfg);
  CHECK_FALSE(detect_convergence(tr, cfg).converged);
}

TEST_CASE("RK4 is fourth order away from switching") {
  oracle::ParamSampler sampler(32);
  int used = 0;
  for (int i = 0; i < 40 && used < 10; ++i) {
    const auto p = sampler.draw();
    const FluidState s0{0.1, 0.5, 0.05};
    FluidConfig coarse{.dt = 0.02, .T = 1.0, .bounded = false};
    FluidConfig fine = coarse;
    fine.dt = 0.01;
    const auto a = integrate(s0, p, coarse);
    const auto b = integrate(s0, p, fine);
    bool positive = true;
    for (const auto& s : b.states) positive = positive && s.y > 0;
    if (!positive) continue;
    const Eigen::Vector3d exact = oracle::expm_apply(oracle::regime_matrix(p, true), 1.0, vec(s0));
    const double ea = (vec(a.states.back()) - exact).norm();
    const double eb = (vec(b.states.back()) - exact).norm();
    if (eb < 1e-13) continue;
    ++used;
    // Halving the step should cut the error by about 16.
    CHECK(ea / eb > 10.0);
    CHECK(ea / eb < 22.0);
  }
  CHECK(used >= 3);
}

TEST_CASE("single-regime trajectory matches the matrix exponential") {
  oracle::ParamSampler sampler(33);
  int used = 0;
  for (int i = 0; i < 200 && used < 20; ++i) {
    const auto p = sampler.draw();
    const FluidState s0{0.0, 0.05, 0.0};
    FluidConfig cfg{.dt = 1e-3, .T = 1.0, .bounded = false};
    const auto tr = integrate(s0, p, cfg);
    bool positive = true;
    for (const auto& s : tr.states) positive = positive && s.y > 0;
    if (!positive) continue;
    ++used;
    const Eigen::Vector3d exact = oracle::expm_apply(oracle::regime_matrix(p, true), 1.0, vec(s0));
    CHECK((vec(tr.states.back()) - exact).norm() <= 1e-6 * exact.norm());
  }
  CHECK(used >= 5);
}

TEST_CASE("bounded and unbounded trajectories agree while the boundary is inactive") {
  const auto p = example1();
  FluidConfig b{.dt = 1e-3, .T = 20.0, .bounded = true};
  FluidConfig u = b;
  u.bounded = false;
  const FluidState s0 = centered(2000, -2000, 1000, p);
  const auto tb = integrate(s0, p, b);
  const auto tu = integrate(s0, p, u);
  CHECK(tu.kind == TrajectoryKind::fluid_unbounded);
  for (std::size_t i = 0; i < tb.size(); ++i) {
    if (on_boundary(tb.states[i], p)) break;
    CHECK(vec(tb.states[i]) == vec(tu.states[i]));
  }
}

TEST_CASE("decay envelope") {
  const auto p = example1();
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n;
  for (int i = 0; i < 5; ++i) {
    Eigen::Vector3d d(n(rng), n(rng), n(rng));
    d.normalize();
    FluidConfig cfg{.dt = 1e-3, .T = 10.0, .bounded = false};
    const auto tr = integrate({d[0], d[1], d[2]}, p, cfg);
    const auto env = decay_envelope(tr);
    REQUIRE(env);
    CHECK(env->a > 0.0);
    for (std::size_t k = 0; k < tr.size(); k += 100)
      CHECK(tr.states[k].norm() <= env->C * std::exp(-env->a * tr.time(k)) * 1.0 + 1e-12);
  }

  // A constant path has no decay.
  Trajectory flat{0.1, std::vector<FluidState>(50, FluidState{1, 1, 1}), TrajectoryKind::fluid_bounded};
  CHECK_FALSE(decay_envelope(flat));
}

TEST_CASE("decay rate of a single-regime system follows its spectral abscissa") {
  // delta = mu and theta = (1-alpha) mu make both regimes the same matrix.
  auto p = example1();
  p.delta = p.mu;
  p.theta = (1 - p.alpha) * p.mu;
  const double rate = -oracle::max_real_part(oracle::regime_matrix(p, true));
  REQUIRE(rate > 0.0);
  FluidConfig cfg{.dt = 1e-3, .T = 10.0, .bounded = false};
  const auto tr = integrate({0.3, 0.5, -0.2}, p, cfg).truncated(10.0);
  const auto env = decay_envelope(tr);
  REQUIRE(env);
  CHECK(std::abs(env->a - rate) <= 0.2 * rate);
}

TEST_CASE("convergence under the sufficient conditions") {
  // Exponential stability of the free system: sampled stable draws from
  // moderate initial states settle.
  oracle::ParamSampler sampler(35, 0.2, 5.0, 0.9);
  int used = 0;
  for (int i = 0; i < 60 && used < 15; ++i) {
    auto p = sampler.draw();
    if (!condition_i(p).satisfied && !condition_ii(p).satisfied) continue;
    ++used;
    FluidConfig cfg{.dt = 1e-2, .T = 400.0, .bounded = false, .conv_tol = 1e-3, .conv_window = 10.0};
    const auto tr = integrate({0.2, -0.3, 0.1}, p, cfg);
    CHECK(detect_convergence(tr, cfg).converged);
  }
  CHECK(used >= 5);
}

TEST_CASE("divergence is reported") {
  // A step far outside RK4's stability region blows up within a few hundred steps.
  FluidConfig cfg{.dt = 50.0, .T = 1e6, .bounded = false};
  CHECK_THROWS_AS(integrate({0.1, 0.1, 0.1}, example1(), cfg), DivergenceError);
  try {
    integrate({0.1, 0.1, 0.1}, example1(), cfg);
  } catch (const DivergenceError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 1e6);
  }
}
