#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "agentinv/core.hpp"
#include "agentinv/fluid.hpp"
#include "agentinv/simulator.hpp"
#include "agentinv/stability.hpp"

namespace agentinv {

struct ExperimentPreset {
  std::string id;
  ModelParams params;
  SimState initial;
  Scheme scheme = Scheme::stylized;
  double horizon = 100.0;
  /// False for presets whose parameters were chosen here rather than taken
  /// from a published listing.
  bool published = true;
  std::string note;
};

const std::vector<ExperimentPreset>& presets();
/// Throws ModelError for an unknown id.
const ExperimentPreset& find_preset(std::string_view id);

/// Pending-agent state right after t = 0 invitations; this is where the fluid
/// comparison starts for the actual scheme.
SimState effective_initial(const SimState& s, Scheme scheme);

/// Runs fn(i) for i in [0, n) on a worker pool; rethrows the first exception.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers = 0);

struct ReplicationSummary {
  std::size_t replications = 0;
  std::vector<double> sup_dists;
  double median_sup_dist = 0.0;
  std::array<double, 3> median_per_component{};
  /// Fraction of replications whose centered path settles within sim_conv_tol.
  double converged_fraction = 0.0;
  std::uint64_t events = 0;
  std::uint64_t invariant_violations = 0;
  double max_target_gap = 0.0;
};

struct CompareOptions {
  FluidConfig fluid;
  double sample_dt = 0.01;
  std::uint64_t seed = 1;
  std::size_t replications = 20;
  Scheme scheme = Scheme::stylized;
  TargetLevel target_level = TargetLevel::before_jump;
  /// Convergence tolerance for simulated (noisy) centered paths.
  double sim_conv_tol = 0.2;
};

struct CompareResult {
  Trajectory fluid;
  SimRun first_run;
  ConvergenceVerdict fluid_verdict;
  std::size_t boundary_contacts = 0;
  ReplicationSummary sims;
};

/// Integrates the fluid model from the centered image of `initial` and runs
/// `replications` independent simulations (streams 0..n-1 under one seed),
/// comparing each against the fluid path on the simulation grid.
CompareResult compare_runs(const ModelParams& params, const SimState& initial, const CompareOptions& opts);

struct ExperimentReport {
  std::string id;
  StabilityReport stability;
  CompareResult bounded;
  Trajectory unbounded;
  std::optional<ConvergenceVerdict> unbounded_verdict;
  std::optional<std::string> unbounded_failure;
};

ExperimentReport run_example(const ExperimentPreset& preset, CompareOptions opts);
/// Writes params.txt, stability.json, fluid.csv, fluid_unbounded.csv, sim.csv and report.json.
void write_example(const ExperimentReport& rep, const ExperimentPreset& preset,
                   const std::filesystem::path& dir);

struct SweepOptions {
  std::string param = "gamma";
  std::vector<double> grid;
  FluidConfig fluid{1e-3, 200.0, true, 1e-3, 10.0};
  /// Simulated replications per grid value; zero skips simulation.
  std::size_t seeds = 0;
  double sim_T = 100.0;
  double sample_dt = 0.01;
  std::uint64_t seed = 1;
  double sim_conv_tol = 0.2;
};

struct SweepEntry {
  double value = 0.0;
  bool cond_i = false;
  bool cond_ii = false;
  Verdict cqlf = Verdict::no;
  bool fluid_converged = false;
  bool unbounded_converged = false;
  std::optional<bool> sim_converged;
};

struct SweepResult {
  std::string param;
  std::vector<SweepEntry> entries;
  /// Grid values that meet a sufficient local-stability condition while some
  /// bounded fluid path from the battery fails to converge.
  std::vector<double> counterexamples;
  /// Grid values that meet neither condition yet every bounded path converges.
  std::vector<double> sufficient_only;
};

/// Centered initial states scaled by the arrival rate: (0,0,0), (0,L,0),
/// (L,-L,L/2), (L,2L,L/2), (L/2,3L,L) in raw (X, Y, Z) with L = lambda r.
std::vector<FluidState> initial_battery(const ModelParams& params);

/// Grid from..to inclusive in increments of step.
std::vector<double> make_grid(double from, double to, double step);

/// Varies gamma or epsilon over the grid and probes local-versus-global stability.
SweepResult conjecture_probe(const ModelParams& base, const SweepOptions& opts);

// Serialization.
nlohmann::json to_json(const StabilityReport& rep);
nlohmann::json to_json(const ReplicationSummary& s);
nlohmann::json to_json(const CompareResult& c);
nlohmann::json to_json(const ExperimentReport& rep);
nlohmann::json to_json(const SweepResult& s);

void write_fluid_csv(std::ostream& out, const Trajectory& traj, const ModelParams& params, bool raw);
/// `t,X,Y,Z,Xtarget` with integer counts; Xtarget empty under the stylized scheme.
void write_sim_csv(std::ostream& out, const SimRun& run);
void write_centered_csv(std::ostream& out, const Trajectory& traj);
void write_sweep_csv(std::ostream& out, const SweepResult& s);

}  // namespace agentinv
