#include "agentinv/harness.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "agentinv/params_io.hpp"

namespace agentinv {

namespace {

// Published listings give Lambda = 2000; all runs use r = 1000.
ModelParams example1() {
  return {.lambda = 2.0, .r = 1000, .alpha = 0.5, .beta = 3.0, .mu = 2.0,
          .delta = 1.0, .theta = 0.1, .gamma = 1.0, .epsilon = 1.5};
}

ModelParams example2(double gamma) {
  return {.lambda = 2.0, .r = 1000, .alpha = 0.9, .beta = 0.05, .mu = 0.5,
          .delta = 0.01, .theta = 0.01, .gamma = gamma, .epsilon = 1.0};
}

ModelParams example4(double gamma) {
  return {.lambda = 2.0, .r = 1000, .alpha = 0.7, .beta = 0.5, .mu = 3.0,
          .delta = 1.0, .theta = 2.0, .gamma = gamma, .epsilon = 1.0};
}

SimState raw(std::int64_t X, std::int64_t Y, std::int64_t Z, std::optional<double> target = std::nullopt) {
  SimState s;
  s.X = X;
  s.Y = Y;
  s.Z = Z;
  s.x_target = target;
  return s;
}

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> out;
  const auto ex1 = example1();
  out.push_back({"ex1a", ex1, raw(0, 0, 0), Scheme::stylized, 100.0, true, "Example 1, initial (0,0,0)"});
  out.push_back({"ex1b", ex1, raw(0, 2000, 0), Scheme::stylized, 100.0, true, "Example 1, initial (0,2000,0)"});
  out.push_back({"ex1c", ex1, raw(2000, -2000, 1000), Scheme::stylized, 100.0, true,
                 "Example 1, initial (2000,-2000,1000)"});
  out.push_back({"ex1d", ex1, raw(2000, 4000, 1000), Scheme::stylized, 100.0, true,
                 "Example 1, initial (2000,4000,1000)"});
  for (double g : {1.0, 5.0, 10.0, 20.0}) {
    out.push_back({fmt::format("ex2g{}", g), example2(g), raw(1000, 6000, 2000), Scheme::stylized, 200.0, true,
                   fmt::format("Example 2, gamma = {}", g)});
  }
  out.push_back({"ex3a", ex1, raw(0, 0, 0, 0.0), Scheme::actual, 100.0, true,
                 "Example 1 parameters, actual scheme, target 0"});
  out.push_back({"ex3b", ex1, raw(0, 0, 0, 1000.0), Scheme::actual, 100.0, true,
                 "Example 1 parameters, actual scheme, target 1000"});
  for (double g : {10.0, 20.0, 2.3}) {
    out.push_back({fmt::format("ex4g{}", g), example4(g), raw(0, 0, 0, 1000.0), Scheme::actual, 100.0, true,
                   fmt::format("Example 4, actual scheme, gamma = {}", g)});
  }
  // Example 5 parameter sets are not published; these satisfy condition (i)
  // and start far enough up the agent queue to reach the x boundary.
  out.push_back({"ex5-set1",
                 {.lambda = 2.0, .r = 1000, .alpha = 0.3, .beta = 1.0, .mu = 1.0,
                  .delta = 0.5, .theta = 0.2, .gamma = 2.0, .epsilon = 1.0},
                 raw(0, 4000, 0), Scheme::stylized, 100.0, false,
                 "artifact-chosen locally stable set (condition i)"});
  out.push_back({"ex5-set2",
                 {.lambda = 2.0, .r = 1000, .alpha = 0.8, .beta = 0.5, .mu = 1.0,
                  .delta = 0.2, .theta = 0.5, .gamma = 3.0, .epsilon = 0.5},
                 raw(0, 3000, 0), Scheme::stylized, 100.0, false,
                 "artifact-chosen locally stable set (condition i)"});
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const auto all = build_presets();
  return all;
}

const ExperimentPreset& find_preset(std::string_view id) {
  for (const auto& p : presets()) {
    if (p.id == id) return p;
  }
  throw ModelError(fmt::format("unknown example '{}'", id));
}

SimState effective_initial(const SimState& s, Scheme scheme) {
  SimState out = s;
  if (scheme == Scheme::actual) {
    const double target = s.x_target.value_or(static_cast<double>(s.X));
    out.x_target = target;
    if (static_cast<double>(out.X) < target) out.X = static_cast<std::int64_t>(std::ceil(target));
  } else {
    out.x_target.reset();
  }
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

CompareResult compare_runs(const ModelParams& params, const SimState& initial, const CompareOptions& opts) {
  validate(params);
  const SimState start = effective_initial(initial, opts.scheme);
  CompareResult out;
  out.fluid = integrate(to_centered(start, params), params, opts.fluid);
  out.fluid_verdict = detect_convergence(out.fluid, opts.fluid);
  out.boundary_contacts = opts.fluid.bounded ? boundary_contacts(out.fluid, params) : 0;
  if (opts.replications == 0) return out;

  const Trajectory fluid_on_grid = resample(out.fluid, opts.sample_dt);
  FluidConfig sim_conv = opts.fluid;
  sim_conv.conv_tol = opts.sim_conv_tol;

  const std::size_t n = opts.replications;
  std::vector<Comparison> comps(n);
  std::vector<char> converged(n, 0);
  std::vector<std::uint64_t> events(n, 0), violations(n, 0);
  std::vector<double> gaps(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    SimConfig cfg;
    cfg.T = opts.fluid.T;
    cfg.sample_dt = opts.sample_dt;
    cfg.seed = opts.seed;
    cfg.stream = i;
    cfg.scheme = opts.scheme;
    cfg.initial = initial;
    cfg.target_level = opts.target_level;
    SimRun sim = run(cfg, params);
    comps[i] = compare_to_fluid(sim.centered, fluid_on_grid);
    converged[i] = detect_convergence(sim.centered, sim_conv).converged;
    events[i] = sim.events;
    violations[i] = sim.invariant_violations;
    gaps[i] = sim.max_target_gap;
    if (i == 0) out.first_run = std::move(sim);
  });

  auto& s = out.sims;
  s.replications = n;
  std::array<std::vector<double>, 3> comp;
  for (std::size_t i = 0; i < n; ++i) {
    s.sup_dists.push_back(comps[i].sup_dist);
    for (int k = 0; k < 3; ++k) comp[k].push_back(comps[i].per_component[k]);
    s.events += events[i];
    s.invariant_violations += violations[i];
    s.max_target_gap = std::max(s.max_target_gap, gaps[i]);
    s.converged_fraction += converged[i] ? 1.0 / static_cast<double>(n) : 0.0;
  }
  s.median_sup_dist = median(s.sup_dists);
  for (int k = 0; k < 3; ++k) s.median_per_component[k] = median(comp[k]);
  return out;
}

ExperimentReport run_example(const ExperimentPreset& preset, CompareOptions opts) {
  opts.scheme = preset.scheme;
  opts.fluid.T = preset.horizon;
  opts.fluid.bounded = true;

  ExperimentReport rep;
  rep.id = preset.id;
  rep.stability = stability_report(preset.params);
  rep.bounded = compare_runs(preset.params, preset.initial, opts);

  FluidConfig free_cfg = opts.fluid;
  free_cfg.bounded = false;
  try {
    rep.unbounded =
        integrate(to_centered(effective_initial(preset.initial, preset.scheme), preset.params), preset.params, free_cfg);
    rep.unbounded_verdict = detect_convergence(rep.unbounded, free_cfg);
  } catch (const DivergenceError& e) {
    rep.unbounded_failure = e.what();
  }
  return rep;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ModelError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

template <typename Writer>
void write_with(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw ModelError(fmt::format("cannot write '{}'", path.string()));
  writer(out);
}

}  // namespace

void write_example(const ExperimentReport& rep, const ExperimentPreset& preset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "params.txt", format_params(preset.params));
  write_text(dir / "stability.json", to_json(rep.stability).dump(2) + "\n");
  write_with(dir / "fluid.csv", [&](std::ostream& o) { write_fluid_csv(o, rep.bounded.fluid, preset.params, false); });
  if (!rep.unbounded.empty()) {
    write_with(dir / "fluid_unbounded.csv",
               [&](std::ostream& o) { write_fluid_csv(o, rep.unbounded, preset.params, false); });
  }
  if (!rep.bounded.first_run.samples.empty()) {
    write_with(dir / "sim.csv", [&](std::ostream& o) { write_sim_csv(o, rep.bounded.first_run); });
  }
  write_text(dir / "report.json", to_json(rep).dump(2) + "\n");
}

std::vector<FluidState> initial_battery(const ModelParams& params) {
  const double L = params.arrival_rate();
  const std::array<std::array<double, 3>, 5> xyz = {
      {{0, 0, 0}, {0, L, 0}, {L, -L, L / 2}, {L, 2 * L, L / 2}, {L / 2, 3 * L, L}}};
  std::vector<FluidState> out;
  for (const auto& [X, Y, Z] : xyz) {
    out.push_back(to_centered(RawPoint{X, Y, std::max(Y, 0.0) + Z}, params));
  }
  return out;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw ModelError("grid needs from <= to and a positive step");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(from + static_cast<double>(i) * step);
  return grid;
}

SweepResult conjecture_probe(const ModelParams& base, const SweepOptions& opts) {
  if (opts.grid.empty()) throw ModelError("sweep grid is empty");
  if (opts.param != "gamma" && opts.param != "epsilon") {
    throw ModelError(fmt::format("cannot sweep '{}': expected gamma or epsilon", opts.param));
  }
  for (std::size_t i = 1; i < opts.grid.size(); ++i) {
    if (!(opts.grid[i] > opts.grid[i - 1])) throw ModelError("sweep grid must be strictly increasing");
  }

  SweepResult out;
  out.param = opts.param;
  out.entries.resize(opts.grid.size());
  parallel_for(opts.grid.size(), [&](std::size_t i) {
    ModelParams p = base;
    (opts.param == "gamma" ? p.gamma : p.epsilon) = opts.grid[i];
    validate(p);
    SweepEntry& e = out.entries[i];
    e.value = opts.grid[i];
    e.cond_i = condition_i(p).satisfied;
    e.cond_ii = condition_ii(p).satisfied;
    e.cqlf = cqlf_exists(build_matrices(p));

    FluidConfig bounded = opts.fluid;
    bounded.bounded = true;
    FluidConfig free_cfg = opts.fluid;
    free_cfg.bounded = false;
    e.fluid_converged = true;
    e.unbounded_converged = true;
    for (const auto& s0 : initial_battery(p)) {
      e.fluid_converged = e.fluid_converged && detect_convergence(integrate(s0, p, bounded), bounded).converged;
      try {
        e.unbounded_converged =
            e.unbounded_converged && detect_convergence(integrate(s0, p, free_cfg), free_cfg).converged;
      } catch (const DivergenceError&) {
        e.unbounded_converged = false;
      }
    }

    if (opts.seeds > 0) {
      FluidConfig sim_conv = opts.fluid;
      sim_conv.conv_tol = opts.sim_conv_tol;
      sim_conv.T = opts.sim_T;
      std::size_t hits = 0;
      for (std::size_t k = 0; k < opts.seeds; ++k) {
        SimConfig cfg;
        cfg.T = opts.sim_T;
        cfg.sample_dt = opts.sample_dt;
        cfg.seed = opts.seed;
        cfg.stream = k;
        hits += detect_convergence(run(cfg, p).centered, sim_conv).converged ? 1 : 0;
      }
      e.sim_converged = 2 * hits > opts.seeds;
    }
  });

  for (const auto& e : out.entries) {
    const bool local = e.cond_i || e.cond_ii;
    if (local && !e.fluid_converged) out.counterexamples.push_back(e.value);
    if (!local && e.fluid_converged) out.sufficient_only.push_back(e.value);
  }
  return out;
}

nlohmann::json to_json(const StabilityReport& rep) {
  using nlohmann::json;
  auto poly = [](const CubicCoeffs& c) { return json::array({c.c0, c.c1, c.c2, c.c3}); };
  json cqlf = rep.cqlf == Verdict::undetermined ? json("undetermined") : json(rep.cqlf == Verdict::yes);
  json thresholds = json::object();
  for (const auto& t : rep.thresholds) thresholds[t.name] = t.value;
  json cors = json::array();
  for (const auto& c : rep.corollaries) {
    cors.push_back({{"id", c.id}, {"applicable", c.applicable}, {"satisfied", c.satisfied}});
  }
  return {{"a1_hurwitz", rep.a1_hurwitz},
          {"a2_hurwitz", rep.a2_hurwitz},
          {"a2_closed_form", rep.a2_closed_form},
          {"cond_i", rep.cond_i},
          {"cond_ii", rep.cond_ii},
          {"cqlf_exists", cqlf},
          {"thresholds", thresholds},
          {"char_poly", {{"a1", poly(rep.a1_poly)}, {"a2", poly(rep.a2_poly)}}},
          {"product_real_eigenvalues", rep.product_real_eigenvalues},
          {"corollaries", cors}};
}

nlohmann::json to_json(const ReplicationSummary& s) {
  return {{"replications", s.replications},
          {"sup_dist", s.sup_dists},
          {"median_sup_dist", s.median_sup_dist},
          {"median_per_component", s.median_per_component},
          {"converged_fraction", s.converged_fraction},
          {"events", s.events},
          {"invariant_violations", s.invariant_violations},
          {"max_target_gap", s.max_target_gap}};
}

namespace {

nlohmann::json to_json(const ConvergenceVerdict& v) {
  return {{"converged", v.converged},
          {"t_conv", v.t_conv ? nlohmann::json(*v.t_conv) : nlohmann::json(nullptr)},
          {"final_norm", v.final_norm}};
}

}  // namespace

nlohmann::json to_json(const CompareResult& c) {
  nlohmann::json j = {{"fluid", to_json(c.fluid_verdict)}, {"boundary_contacts", c.boundary_contacts}};
  if (c.sims.replications > 0) j["simulation"] = to_json(c.sims);
  return j;
}

nlohmann::json to_json(const ExperimentReport& rep) {
  nlohmann::json j = to_json(rep.bounded);
  j["id"] = rep.id;
  j["converged"] = rep.bounded.fluid_verdict.converged;
  j["cond_i"] = rep.stability.cond_i;
  j["cond_ii"] = rep.stability.cond_ii;
  if (rep.unbounded_verdict) {
    j["unbounded"] = to_json(*rep.unbounded_verdict);
  } else if (rep.unbounded_failure) {
    j["unbounded"] = {{"converged", false}, {"error", *rep.unbounded_failure}};
  }
  return j;
}

nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    nlohmann::json cqlf = e.cqlf == Verdict::undetermined ? nlohmann::json("undetermined")
                                                          : nlohmann::json(e.cqlf == Verdict::yes);
    entries.push_back({{"value", e.value},
                       {"cond_i", e.cond_i},
                       {"cond_ii", e.cond_ii},
                       {"cqlf_exists", cqlf},
                       {"fluid_converged", e.fluid_converged},
                       {"unbounded_converged", e.unbounded_converged},
                       {"sim_converged", e.sim_converged ? nlohmann::json(*e.sim_converged) : nlohmann::json(nullptr)}});
  }
  return {{"param", s.param},
          {"entries", entries},
          {"counterexamples", s.counterexamples},
          {"sufficient_only", s.sufficient_only}};
}

void write_fluid_csv(std::ostream& out, const Trajectory& traj, const ModelParams& params, bool raw_coords) {
  if (raw_coords) {
    out << "t,X,Y,V,Z\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto p = from_centered(traj.states[i], params);
      fmt::print(out, "{:.10g},{},{},{},{}\n", traj.time(i), p.X, p.Y, p.V, p.V - std::max(p.Y, 0.0));
    }
    return;
  }
  write_centered_csv(out, traj);
}

void write_centered_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,v\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    fmt::print(out, "{:.10g},{},{},{}\n", traj.time(i), s.x, s.y, s.v);
  }
}

void write_sim_csv(std::ostream& out, const SimRun& run) {
  out << "t,X,Y,Z,Xtarget\n";
  for (const auto& s : run.samples) {
    if (s.x_target) {
      fmt::print(out, "{:.10g},{},{},{},{}\n", s.t, s.X, s.Y, s.Z, *s.x_target);
    } else {
      fmt::print(out, "{:.10g},{},{},{},\n", s.t, s.X, s.Y, s.Z);
    }
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& s) {
  out << s.param << ",cond_i,cond_ii,cqlf_exists,fluid_converged,unbounded_converged,sim_converged\n";
  for (const auto& e : s.entries) {
    fmt::print(out, "{},{},{},{},{},{},{}\n", e.value, int(e.cond_i), int(e.cond_ii), to_string(e.cqlf),
               int(e.fluid_converged), int(e.unbounded_converged),
               e.sim_converged ? std::to_string(int(*e.sim_converged)) : std::string());
  }
}

}  // namespace agentinv
