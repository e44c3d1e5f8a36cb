#include "agentinv/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace agentinv {

const char* to_string(Scheme scheme) {
  return scheme == Scheme::stylized ? "stylized" : "actual";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "stylized") return Scheme::stylized;
  if (text == "actual") return Scheme::actual;
  throw ModelError(fmt::format("unknown scheme '{}'", text));
}

EventRates rates(const SimState& s, const ModelParams& p, Scheme scheme) {
  EventRates r;
  r.arrival = p.arrival_rate();
  r.acceptance = p.beta * static_cast<double>(s.X);
  r.type3 = scheme == Scheme::stylized ? p.epsilon * static_cast<double>(std::abs(s.Y)) : 0.0;
  r.service = p.mu * static_cast<double>(s.Z);
  r.cust_abandon = p.delta * static_cast<double>(s.customer_queue());
  r.agent_abandon = p.theta * static_cast<double>(s.agent_queue());
  return r;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double Rng::exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }

bool Rng::bernoulli(double p) { return uniform() < p; }

std::int64_t gamma_increment(double gamma, Rng& rng) {
  const double whole = std::floor(gamma);
  const double frac = gamma - whole;
  auto g = static_cast<std::int64_t>(whole);
  if (frac > 0.0 && rng.bernoulli(frac)) ++g;
  return g;
}

Event pick_event(const EventRates& r, const ModelParams& p, Rng& rng) {
  const std::array<double, 6> weights = {r.arrival, r.acceptance, r.type3,
                                         r.service, r.cust_abandon, r.agent_abandon};
  double u = rng.uniform() * r.total();
  int chosen = -1;
  for (int i = 0; i < 6; ++i) {
    if (weights[i] <= 0.0) continue;
    chosen = i;
    if (u < weights[i]) break;
    u -= weights[i];
  }
  switch (chosen) {
    case 0: return Event::arrival;
    case 1: return Event::acceptance;
    case 2: return Event::type3;
    case 3: return rng.bernoulli(p.alpha) ? Event::service_return : Event::service_leave;
    case 4: return Event::customer_abandon;
    case 5: return Event::agent_abandon;
    default: throw NumericalError("no event has a positive rate");
  }
}

namespace {

// Moves of (Y, Z) shared by both schemes; returns the change in Y.
std::int64_t move_queues(SimState& s, Event e) {
  switch (e) {
    case Event::arrival:
      if (s.Y > 0) ++s.Z;
      --s.Y;
      return -1;
    case Event::acceptance:
      if (s.Y < 0) ++s.Z;
      ++s.Y;
      return 1;
    case Event::service_return:
      if (s.Y >= 0) --s.Z;
      ++s.Y;
      return 1;
    case Event::service_leave:
      --s.Z;
      return 0;
    case Event::customer_abandon:
      ++s.Y;
      return 1;
    case Event::agent_abandon:
      --s.Y;
      return -1;
    case Event::type3:
      return 0;
  }
  return 0;
}

}  // namespace

SimState apply_stylized(const SimState& s, Event e, const ModelParams& p, Rng& rng) {
  SimState n = s;
  if (e == Event::type3) {
    if (n.X >= 1) {
      n.X -= (n.Y > 0) - (n.Y < 0);
    } else if (n.Y < 0) {
      n.X += 1;
    }
    return n;
  }
  const std::int64_t dy = move_queues(n, e);
  if (dy < 0) {
    n.X += gamma_increment(p.gamma, rng);
  } else if (dy > 0) {
    n.X -= std::min(gamma_increment(p.gamma, rng), n.X);
  }
  return n;
}

SimState apply_actual(const SimState& s, Event e, const ModelParams& p, TargetLevel level) {
  if (e == Event::type3) throw ModelError("type-3 events do not occur under the actual scheme");
  SimState n = s;
  const std::int64_t y_before = n.Y;
  const std::int64_t dy = move_queues(n, e);
  if (e == Event::acceptance) --n.X;

  double target = n.x_target.value_or(static_cast<double>(s.X));
  if (dy != 0) {
    const double held = n.t - n.y_changed_at;
    const double y_level = static_cast<double>(level == TargetLevel::before_jump ? y_before : n.Y);
    target = std::max(0.0, target - p.gamma * static_cast<double>(dy) - p.epsilon * y_level * held);
    n.y_changed_at = n.t;
  }
  n.x_target = target;
  if (static_cast<double>(n.X) < target) n.X = static_cast<std::int64_t>(std::ceil(target));
  return n;
}

SimState step_stylized(const SimState& s, const ModelParams& p, Rng& rng) {
  const auto r = rates(s, p, Scheme::stylized);
  if (!(r.total() > 0.0)) throw NumericalError("absorbing state: total event rate is zero");
  SimState n = s;
  n.t += rng.exponential(r.total());
  return apply_stylized(n, pick_event(r, p, rng), p, rng);
}

SimState step_actual(const SimState& s, const ModelParams& p, Rng& rng, TargetLevel level) {
  const auto r = rates(s, p, Scheme::actual);
  if (!(r.total() > 0.0)) throw NumericalError("absorbing state: total event rate is zero");
  SimState n = s;
  n.t += rng.exponential(r.total());
  return apply_actual(n, pick_event(r, p, rng), p, level);
}

void validate(const SimConfig& cfg) {
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ModelError("T must be positive");
  if (!(cfg.sample_dt > 0.0)) throw ModelError("sample_dt must be positive");
  if (cfg.sample_dt > cfg.T) throw ModelError("sample_dt must not exceed T");
  check_state(cfg.initial);
}

SimRun run(const SimConfig& cfg, const ModelParams& params) {
  validate(params);
  validate(cfg);
  Rng rng(cfg.seed, cfg.stream);
  const bool actual = cfg.scheme == Scheme::actual;

  SimState s = cfg.initial;
  s.t = 0.0;
  s.y_changed_at = 0.0;
  if (actual) {
    if (!s.x_target) s.x_target = static_cast<double>(s.X);
    if (static_cast<double>(s.X) < *s.x_target) s.X = static_cast<std::int64_t>(std::ceil(*s.x_target));
  } else {
    s.x_target.reset();
  }

  SimRun out;
  out.sample_dt = cfg.sample_dt;
  const auto n_samples = static_cast<std::size_t>(std::llround(cfg.T / cfg.sample_dt)) + 1;
  out.samples.reserve(n_samples);

  auto record_until = [&](double t_next) {
    while (out.samples.size() < n_samples &&
           static_cast<double>(out.samples.size()) * cfg.sample_dt < t_next) {
      SimState held = s;
      held.t = static_cast<double>(out.samples.size()) * cfg.sample_dt;
      out.samples.push_back(held);
    }
  };

  while (out.samples.size() < n_samples) {
    const auto r = rates(s, params, cfg.scheme);
    if (!(r.total() > 0.0)) throw NumericalError("absorbing state: total event rate is zero");
    const double t_next = s.t + rng.exponential(r.total());
    record_until(t_next);
    if (out.samples.size() >= n_samples) break;

    const Event e = pick_event(r, params, rng);
    SimState next = s;
    next.t = t_next;
    s = actual ? apply_actual(next, e, params, cfg.target_level) : apply_stylized(next, e, params, rng);
    ++out.events;

    bool ok = s.X >= 0 && s.Z >= 0;
    if (actual) {
      const double target = *s.x_target;
      ok = ok && target >= 0.0 && static_cast<double>(s.X) >= target;
      out.max_target_gap = std::max(out.max_target_gap, static_cast<double>(s.X) - target);
    }
    if (!ok) ++out.invariant_violations;
  }

  out.centered = Trajectory{cfg.sample_dt, {}, actual ? TrajectoryKind::sim_actual : TrajectoryKind::sim_stylized};
  out.centered.states.reserve(out.samples.size());
  for (const auto& sample : out.samples) out.centered.states.push_back(to_centered(sample, params));
  return out;
}

Comparison compare_to_fluid(const Trajectory& sim, const Trajectory& fluid) {
  if (sim.size() != fluid.size() || std::abs(sim.dt - fluid.dt) > 1e-9 * std::max(sim.dt, fluid.dt)) {
    throw ModelError(fmt::format("grid mismatch: {} samples at dt={} vs {} samples at dt={}", sim.size(),
                                 sim.dt, fluid.size(), fluid.dt));
  }
  Comparison c;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const auto& a = sim.states[i];
    const auto& b = fluid.states[i];
    const std::array<double, 3> d = {std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.v - b.v)};
    c.sup_dist = std::max(c.sup_dist, std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
    for (int k = 0; k < 3; ++k) c.per_component[k] = std::max(c.per_component[k], d[k]);
  }
  return c;
}

Trajectory resample(const Trajectory& traj, double dt) {
  const double ratio = dt / traj.dt;
  const double factor = std::round(ratio);
  if (!(factor >= 1.0) || std::abs(ratio - factor) > 1e-6 * factor) {
    throw ModelError(fmt::format("grid spacing {} is not a multiple of {}", dt, traj.dt));
  }
  return traj.decimated(static_cast<std::size_t>(factor));
}

}  // namespace agentinv
