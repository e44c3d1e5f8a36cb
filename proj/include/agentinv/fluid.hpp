#pragma once

#include <optional>

#include "agentinv/core.hpp"

namespace agentinv {

struct FluidConfig {
  double dt = 1e-3;
  double T = 100.0;
  /// Enforce the reflecting boundary x >= -lambda(1-alpha)/beta.
  bool bounded = true;
  double conv_tol = 1e-3;
  double conv_window = 10.0;
};

void validate(const FluidConfig& cfg);

/// Blow-up of the integrated state; `time` is the first grid time with a non-finite value.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(double time);
  double time() const { return time_; }

 private:
  double time_;
};

/// Vector field of the boundary-free switched system.
FluidState rhs_unbounded(const FluidState& s, const ModelParams& params);

/// True when x is within the snap tolerance of the boundary.
bool on_boundary(const FluidState& s, const ModelParams& params);

/// Vector field with reflection: on the boundary x' is clipped at zero from below.
/// Throws ModelError if x lies below the boundary beyond the snap tolerance.
FluidState rhs_bounded(const FluidState& s, const ModelParams& params);

/// Fixed-step classical RK4, sampled on every step. With `cfg.bounded` the
/// x coordinate is projected back onto the admissible half-space after each step.
Trajectory integrate(const FluidState& s0, const ModelParams& params, const FluidConfig& cfg);

/// Number of samples of `traj` that sit on the x boundary.
std::size_t boundary_contacts(const Trajectory& traj, const ModelParams& params);

struct ConvergenceVerdict {
  bool converged = false;
  std::optional<double> t_conv;
  double final_norm = 0.0;
};

ConvergenceVerdict detect_convergence(const Trajectory& traj, const FluidConfig& cfg);

/// Fit of ||u(t)|| <= C exp(-a t) ||u(0)||.
struct DecayEnvelope {
  double C = 0.0;
  double a = 0.0;
};

/// Least-squares line through log ||u(t)||; empty unless the slope is negative.
std::optional<DecayEnvelope> decay_envelope(const Trajectory& traj);

}  // namespace agentinv
