#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace agentinv {

/// Raised when a parameter set, state or configuration violates its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure produces unusable output.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model and control parameters for the system with scale index `r`.
/// The customer arrival rate is lambda * r; every other rate is scale free.
struct ModelParams {
  double lambda = 1.0;
  std::int64_t r = 1;
  double alpha = 0.0;
  double beta = 1.0;
  double mu = 1.0;
  double delta = 0.0;
  double theta = 0.0;
  double gamma = 1.0;
  double epsilon = 1.0;

  double arrival_rate() const { return lambda * static_cast<double>(r); }
  /// Boundary of the centered pending-agent coordinate, -lambda(1-alpha)/beta.
  double x_boundary() const { return -lambda * (1.0 - alpha) / beta; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Returns `params` unchanged or throws ModelError naming the first violated constraint.
const ModelParams& validate(const ModelParams& params);

/// Centered, r-scaled coordinates: pending agents, agent-minus-customer queue,
/// agents in system.
struct FluidState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;

  double norm() const;
  friend bool operator==(const FluidState&, const FluidState&) = default;
};

/// Integer state of the queueing process. `x_target` is present only under the
/// actual feedback scheme; `y_changed_at` records the last epoch Y moved.
struct SimState {
  std::int64_t X = 0;
  std::int64_t Y = 0;
  std::int64_t Z = 0;
  std::optional<double> x_target;
  double t = 0.0;
  double y_changed_at = 0.0;

  std::int64_t agent_queue() const { return Y > 0 ? Y : 0; }
  std::int64_t customer_queue() const { return Y < 0 ? -Y : 0; }
  /// Total active agents, Y+ + Z.
  std::int64_t V() const { return agent_queue() + Z; }
};

/// Throws ModelError if X < 0, Z < 0, or the target is negative.
void check_state(const SimState& s);

/// Operating point of the raw process, around which it is centered.
struct OperatingPoint {
  double X_center = 0.0;
  double Y_center = 0.0;
  double Z_center = 0.0;
};

OperatingPoint operating_point(const ModelParams& params);

/// Raw (X, Y, V) coordinates, real valued.
struct RawPoint {
  double X = 0.0;
  double Y = 0.0;
  double V = 0.0;
};

FluidState to_centered(const SimState& s, const ModelParams& params);
FluidState to_centered(const RawPoint& p, const ModelParams& params);
RawPoint from_centered(const FluidState& s, const ModelParams& params);

enum class TrajectoryKind { fluid_bounded, fluid_unbounded, sim_stylized, sim_actual };

const char* to_string(TrajectoryKind kind);

/// States sampled on the uniform grid t_i = i * dt, i = 0 .. size()-1.
struct Trajectory {
  double dt = 0.0;
  std::vector<FluidState> states;
  TrajectoryKind kind = TrajectoryKind::fluid_unbounded;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
  double horizon() const { return empty() ? 0.0 : time(size() - 1); }

  /// Keeps the samples with t <= t_end.
  Trajectory truncated(double t_end) const;
  /// Keeps every `factor`-th sample; the grid spacing becomes factor * dt.
  Trajectory decimated(std::size_t factor) const;
};

}  // namespace agentinv
