#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "agentinv/core.hpp"

namespace agentinv {

enum class Scheme { stylized, actual };

const char* to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

/// Which Y level enters the epsilon * Y * dt term of the target update.
enum class TargetLevel { before_jump, after_jump };

enum class Event {
  arrival,
  acceptance,
  type3,
  service_return,
  service_leave,
  customer_abandon,
  agent_abandon,
};

/// Per-category transition rates of the Markov chain in state s.
struct EventRates {
  double arrival = 0.0;
  double acceptance = 0.0;
  double type3 = 0.0;
  double service = 0.0;
  double cust_abandon = 0.0;
  double agent_abandon = 0.0;

  double total() const {
    return arrival + acceptance + type3 + service + cust_abandon + agent_abandon;
  }
};

EventRates rates(const SimState& s, const ModelParams& params, Scheme scheme);

/// Random stream keyed by (seed, stream index). Replications use distinct
/// stream indices under one seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();
  double exponential(double rate);
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
};

/// floor(gamma) + Bernoulli(gamma - floor(gamma)); exactly gamma for integer gamma.
std::int64_t gamma_increment(double gamma, Rng& rng);

/// Picks a category with probability proportional to its rate; service
/// completions are split into return / leave with probabilities alpha, 1 - alpha.
Event pick_event(const EventRates& r, const ModelParams& params, Rng& rng);

/// Applies one stylized-scheme transition without advancing the clock.
SimState apply_stylized(const SimState& s, Event e, const ModelParams& params, Rng& rng);

/// Applies one actual-scheme transition at the clock value already stored in
/// `s.t`: the physical move, the target update when Y changes, then invitations.
SimState apply_actual(const SimState& s, Event e, const ModelParams& params,
                      TargetLevel level = TargetLevel::before_jump);

/// Exponential holding time, event selection and transition.
SimState step_stylized(const SimState& s, const ModelParams& params, Rng& rng);
SimState step_actual(const SimState& s, const ModelParams& params, Rng& rng,
                     TargetLevel level = TargetLevel::before_jump);

struct SimConfig {
  double T = 100.0;
  double sample_dt = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  Scheme scheme = Scheme::stylized;
  SimState initial;
  TargetLevel target_level = TargetLevel::before_jump;
};

void validate(const SimConfig& cfg);

struct SimRun {
  double sample_dt = 0.0;
  /// Raw state held at each grid time (state constant between events).
  std::vector<SimState> samples;
  Trajectory centered;
  std::uint64_t events = 0;
  /// Events after which X < 0, Z < 0, X_target < 0 or X < X_target.
  std::uint64_t invariant_violations = 0;
  /// Largest X - X_target seen after an event (actual scheme).
  double max_target_gap = 0.0;
};

/// Simulates to cfg.T. Under the actual scheme a missing initial target
/// defaults to X, and pending agents are invited at t = 0 if X < X_target.
SimRun run(const SimConfig& cfg, const ModelParams& params);

struct Comparison {
  double sup_dist = 0.0;
  std::array<double, 3> per_component{};
};

/// Sup over the common grid of the Euclidean and per-coordinate distances.
/// Throws ModelError if the grids differ.
Comparison compare_to_fluid(const Trajectory& sim, const Trajectory& fluid);

/// Decimates a finer trajectory onto a grid of spacing `dt`; throws ModelError
/// unless dt is an integer multiple of the trajectory spacing.
Trajectory resample(const Trajectory& traj, double dt);

}  // namespace agentinv
