#include "agentinv/fluid.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace agentinv {

void validate(const FluidConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ModelError("dt must be positive");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ModelError("T must be positive");
  if (cfg.dt > cfg.T) throw ModelError("dt must not exceed T");
  if (!(cfg.conv_tol > 0.0)) throw ModelError("conv_tol must be positive");
  if (!(cfg.conv_window > 0.0)) throw ModelError("conv_window must be positive");
}

DivergenceError::DivergenceError(double time)
    : NumericalError(fmt::format("divergence (non-finite state) at t = {}", time)), time_(time) {}

namespace {

double snap_tolerance(double boundary) { return 1e-9 * (1.0 + std::abs(boundary)); }

FluidState operator+(const FluidState& a, const FluidState& b) {
  return {a.x + b.x, a.y + b.y, a.v + b.v};
}

FluidState operator*(double s, const FluidState& a) { return {s * a.x, s * a.y, s * a.v}; }

bool finite(const FluidState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v);
}

// Reflected field without the admissibility check; RK4 stages may dip a
// fraction of a step below the boundary.
FluidState reflected(const FluidState& s, const ModelParams& p) {
  FluidState d = rhs_unbounded(s, p);
  const double boundary = p.x_boundary();
  if (s.x - boundary < snap_tolerance(boundary)) d.x = std::max(d.x, 0.0);
  return d;
}

}  // namespace

FluidState rhs_unbounded(const FluidState& s, const ModelParams& p) {
  // y == 0 takes the y >= 0 branch; both branches agree there.
  const double yp = std::max(s.y, 0.0);
  const double ym = std::max(-s.y, 0.0);
  const double in_service = s.v - yp;
  FluidState d;
  d.y = p.beta * s.x + p.alpha * p.mu * in_service + p.delta * ym - p.theta * yp;
  d.v = p.beta * s.x - (1.0 - p.alpha) * p.mu * in_service - p.theta * yp;
  d.x = -p.gamma * d.y - p.epsilon * s.y;
  return d;
}

bool on_boundary(const FluidState& s, const ModelParams& p) {
  const double boundary = p.x_boundary();
  return s.x - boundary < snap_tolerance(boundary);
}

FluidState rhs_bounded(const FluidState& s, const ModelParams& p) {
  const double boundary = p.x_boundary();
  if (s.x < boundary - snap_tolerance(boundary)) {
    throw ModelError("state outside admissible region");
  }
  return reflected(s, p);
}

Trajectory integrate(const FluidState& s0, const ModelParams& params, const FluidConfig& cfg) {
  validate(params);
  validate(cfg);
  const double boundary = params.x_boundary();
  if (cfg.bounded && s0.x < boundary - snap_tolerance(boundary)) {
    throw ModelError("state outside admissible region");
  }

  auto field = [&](const FluidState& s) {
    return cfg.bounded ? reflected(s, params) : rhs_unbounded(s, params);
  };

  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  Trajectory traj{cfg.dt, {}, cfg.bounded ? TrajectoryKind::fluid_bounded : TrajectoryKind::fluid_unbounded};
  traj.states.reserve(steps + 1);

  FluidState s = s0;
  if (cfg.bounded) s.x = std::max(s.x, boundary);
  traj.states.push_back(s);
  const double h = cfg.dt;
  for (std::size_t i = 1; i <= steps; ++i) {
    const FluidState k1 = field(s);
    const FluidState k2 = field(s + (h / 2) * k1);
    const FluidState k3 = field(s + (h / 2) * k2);
    const FluidState k4 = field(s + h * k3);
    s = s + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(s)) throw DivergenceError(traj.time(i));
    if (cfg.bounded) s.x = std::max(s.x, boundary);
    traj.states.push_back(s);
  }
  return traj;
}

std::size_t boundary_contacts(const Trajectory& traj, const ModelParams& params) {
  return static_cast<std::size_t>(std::count_if(
      traj.states.begin(), traj.states.end(), [&](const FluidState& s) { return on_boundary(s, params); }));
}

ConvergenceVerdict detect_convergence(const Trajectory& traj, const FluidConfig& cfg) {
  ConvergenceVerdict out;
  if (traj.empty()) return out;
  out.final_norm = traj.states.back().norm();

  std::size_t first_good = 0;
  for (std::size_t i = traj.size(); i-- > 0;) {
    if (!(traj.states[i].norm() < cfg.conv_tol)) {
      first_good = i + 1;
      break;
    }
  }
  if (first_good < traj.size()) {
    out.t_conv = traj.time(first_good);
    out.converged = *out.t_conv <= traj.horizon() - cfg.conv_window + 1e-9 * traj.dt;
  }
  return out;
}

std::optional<DecayEnvelope> decay_envelope(const Trajectory& traj) {
  if (traj.size() < 2) return std::nullopt;
  const double n0 = traj.states.front().norm();
  if (!(n0 > 0.0)) return std::nullopt;

  double st = 0, sy = 0, stt = 0, sty = 0, n = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double norm = traj.states[i].norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) continue;
    const double t = traj.time(i);
    const double ly = std::log(norm);
    st += t;
    sy += ly;
    stt += t * t;
    sty += t * ly;
    n += 1;
  }
  const double denom = n * stt - st * st;
  if (n < 2 || denom <= 0.0) return std::nullopt;
  const double slope = (n * sty - st * sy) / denom;
  // A flat fit (within round-off over the horizon) is not a decay.
  if (!(slope * traj.horizon() < -1e-9)) return std::nullopt;

  DecayEnvelope env{0.0, -slope};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double norm = traj.states[i].norm();
    if (std::isfinite(norm)) env.C = std::max(env.C, norm * std::exp(env.a * traj.time(i)) / n0);
  }
  return env;
}

}  // namespace agentinv
