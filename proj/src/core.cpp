#include "agentinv/core.hpp"

#include <cmath>

namespace agentinv {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ModelError(message);
}

}  // namespace

const ModelParams& validate(const ModelParams& p) {
  // Written as !(a > b) where needed so NaN fails every check.
  require(p.lambda > 0.0 && std::isfinite(p.lambda), "lambda must be positive");
  require(p.r >= 1, "r must be at least 1");
  require(p.alpha >= 0.0 && p.alpha < 1.0, "alpha must lie in [0,1)");
  require(p.beta > 0.0 && std::isfinite(p.beta), "beta must be positive");
  require(p.mu > 0.0 && std::isfinite(p.mu), "mu must be positive");
  require(p.delta >= 0.0 && std::isfinite(p.delta), "delta must be non-negative");
  require(p.theta >= 0.0 && std::isfinite(p.theta), "theta must be non-negative");
  require(p.gamma > 0.0 && std::isfinite(p.gamma), "gamma must be positive");
  require(p.epsilon > 0.0 && std::isfinite(p.epsilon), "epsilon must be positive");
  return p;
}

double FluidState::norm() const { return std::sqrt(x * x + y * y + v * v); }

void check_state(const SimState& s) {
  require(s.X >= 0, "X must be non-negative");
  require(s.Z >= 0, "Z must be non-negative");
  require(s.t >= 0.0, "t must be non-negative");
  if (s.x_target) require(*s.x_target >= 0.0, "X_target must be non-negative");
}

OperatingPoint operating_point(const ModelParams& p) {
  const double big_lambda = p.arrival_rate();
  return {big_lambda * (1.0 - p.alpha) / p.beta, 0.0, big_lambda / p.mu};
}

FluidState to_centered(const RawPoint& raw, const ModelParams& p) {
  const auto op = operating_point(p);
  const double r = static_cast<double>(p.r);
  return {(raw.X - op.X_center) / r, raw.Y / r, (raw.V - op.Z_center) / r};
}

FluidState to_centered(const SimState& s, const ModelParams& p) {
  return to_centered(RawPoint{static_cast<double>(s.X), static_cast<double>(s.Y),
                              static_cast<double>(s.V())},
                     p);
}

RawPoint from_centered(const FluidState& s, const ModelParams& p) {
  const auto op = operating_point(p);
  const double r = static_cast<double>(p.r);
  return {r * s.x + op.X_center, r * s.y, r * s.v + op.Z_center};
}

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::fluid_bounded: return "fluid-bounded";
    case TrajectoryKind::fluid_unbounded: return "fluid-unbounded";
    case TrajectoryKind::sim_stylized: return "sim-stylized";
    case TrajectoryKind::sim_actual: return "sim-actual";
  }
  return "unknown";
}

Trajectory Trajectory::truncated(double t_end) const {
  Trajectory out{dt, {}, kind};
  for (std::size_t i = 0; i < states.size() && time(i) <= t_end + 1e-9 * dt; ++i) {
    out.states.push_back(states[i]);
  }
  return out;
}

Trajectory Trajectory::decimated(std::size_t factor) const {
  if (factor == 0) throw ModelError("decimation factor must be positive");
  Trajectory out{dt * static_cast<double>(factor), {}, kind};
  for (std::size_t i = 0; i < states.size(); i += factor) out.states.push_back(states[i]);
  return out;
}

}  // namespace agentinv
