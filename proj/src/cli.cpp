#include "agentinv/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agentinv/harness.hpp"
#include "agentinv/params_io.hpp"

namespace agentinv {

namespace {

struct Options {
  std::string params_file;
  std::vector<std::string> overrides;
  std::string preset;
  std::string scheme;
  std::string initial;
  std::optional<double> T;
  double dt = 1e-3;
  double sample_dt = 0.01;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";
  std::size_t replications = 20;
  bool unbounded = false;
  bool raw = false;
  bool centered = false;
  std::string target_level = "before";
  // example
  std::string example_id;
  // sweep
  std::string sweep_param = "gamma";
  double from = 1.0;
  double to = 20.0;
  double step = 0.1;
  std::size_t seeds = 0;
};

const ExperimentPreset* preset_of(const Options& o) {
  return o.preset.empty() ? nullptr : &find_preset(o.preset);
}

ModelParams load_params(const Options& o) {
  ParamSource src;
  if (const auto* p = preset_of(o)) src.assign(p->params);
  if (!o.params_file.empty()) src.read_file(o.params_file);
  for (const auto& kv : o.overrides) src.set(kv);
  return src.build();
}

std::int64_t parse_count(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ModelError(fmt::format("'{}' is not an integer", text));
  }
  return v;
}

SimState parse_initial(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3 && parts.size() != 4) throw ModelError("--initial expects X,Y,Z[,Xtarget]");
  SimState s;
  s.X = parse_count(parts[0]);
  s.Y = parse_count(parts[1]);
  s.Z = parse_count(parts[2]);
  if (parts.size() == 4) {
    double t = 0.0;
    const auto& p = parts[3];
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), t);
    if (ec != std::errc() || ptr != p.data() + p.size()) throw ModelError("Xtarget is not a number");
    s.x_target = t;
  }
  check_state(s);
  return s;
}

SimState initial_of(const Options& o) {
  if (!o.initial.empty()) return parse_initial(o.initial);
  if (const auto* p = preset_of(o)) return p->initial;
  return SimState{};
}

Scheme scheme_of(const Options& o) {
  if (!o.scheme.empty()) return parse_scheme(o.scheme);
  if (const auto* p = preset_of(o)) return p->scheme;
  return Scheme::stylized;
}

double horizon_of(const Options& o, double fallback) {
  if (o.T) return *o.T;
  if (const auto* p = preset_of(o)) return p->horizon;
  return fallback;
}

TargetLevel level_of(const Options& o) {
  if (o.target_level == "before") return TargetLevel::before_jump;
  if (o.target_level == "after") return TargetLevel::after_jump;
  throw ModelError("--target-level must be before or after");
}

FluidConfig fluid_config(const Options& o) {
  FluidConfig cfg;
  cfg.dt = o.dt;
  cfg.T = horizon_of(o, cfg.T);
  cfg.bounded = !o.unbounded;
  cfg.conv_window = std::min(cfg.conv_window, cfg.T);
  validate(cfg);
  return cfg;
}

std::ofstream open_out(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  std::ofstream f(std::filesystem::path(o.out_dir) / name);
  if (!f) throw ModelError(fmt::format("cannot write {}/{}", o.out_dir, name));
  return f;
}

void add_param_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--params", o.params_file, "parameter file (key = value lines)");
  cmd->add_option("--set", o.overrides, "override a parameter, key=value (repeatable)");
  cmd->add_option("--preset", o.preset, "start from an example preset's parameters, initial state and scheme");
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--scheme", o.scheme, "stylized or actual");
  cmd->add_option("--initial", o.initial, "raw initial state X,Y,Z[,Xtarget]");
  cmd->add_option("-T,--T", o.T, "time horizon");
  cmd->add_option("--dt", o.dt, "fluid integration step");
  cmd->add_option("--sample-dt", o.sample_dt, "simulation output grid spacing");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--target-level", o.target_level, "Y level in the target update: before or after the jump");
}

int cmd_stability(const Options& o, std::ostream& out) {
  const auto rep = stability_report(load_params(o));
  const auto text = to_json(rep).dump(2);
  if (!o.out_dir.empty()) open_out(o, "stability.json") << text << "\n";
  out << text << "\n";
  return kExitOk;
}

int cmd_fluid(const Options& o, std::ostream& out, std::ostream& err) {
  const auto params = load_params(o);
  const auto cfg = fluid_config(o);
  const auto s0 = to_centered(effective_initial(initial_of(o), scheme_of(o)), params);
  const auto traj = integrate(s0, params, cfg);
  const auto verdict = detect_convergence(traj, cfg);
  nlohmann::json report = {{"converged", verdict.converged},
                           {"t_conv", verdict.t_conv ? nlohmann::json(*verdict.t_conv) : nlohmann::json(nullptr)},
                           {"final_norm", verdict.final_norm},
                           {"boundary_contacts", cfg.bounded ? boundary_contacts(traj, params) : 0}};
  if (!o.out_dir.empty()) {
    auto f = open_out(o, "fluid.csv");
    write_fluid_csv(f, traj, params, o.raw);
    open_out(o, "report.json") << report.dump(2) << "\n";
  }
  if (o.format == "json") {
    out << report.dump(2) << "\n";
  } else if (o.out_dir.empty()) {
    write_fluid_csv(out, traj, params, o.raw);
  }
  fmt::print(err, "converged={} final_norm={}\n", verdict.converged, verdict.final_norm);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto params = load_params(o);
  SimConfig cfg;
  cfg.T = horizon_of(o, 100.0);
  cfg.sample_dt = o.sample_dt;
  cfg.seed = o.seed;
  cfg.scheme = scheme_of(o);
  cfg.initial = initial_of(o);
  cfg.target_level = level_of(o);
  const auto sim = run(cfg, params);
  auto emit = [&](std::ostream& s) {
    if (o.centered) {
      write_centered_csv(s, sim.centered);
    } else {
      write_sim_csv(s, sim);
    }
  };
  if (!o.out_dir.empty()) {
    auto f = open_out(o, "sim.csv");
    emit(f);
  } else {
    emit(out);
  }
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto params = load_params(o);
  CompareOptions opts;
  opts.fluid = fluid_config(o);
  opts.sample_dt = o.sample_dt;
  opts.seed = o.seed;
  opts.replications = o.replications;
  opts.scheme = scheme_of(o);
  opts.target_level = level_of(o);
  const auto res = compare_runs(params, initial_of(o), opts);
  const auto text = to_json(res).dump(2);
  if (!o.out_dir.empty()) {
    open_out(o, "report.json") << text << "\n";
    auto f = open_out(o, "fluid.csv");
    write_fluid_csv(f, res.fluid, params, false);
    if (!res.first_run.samples.empty()) {
      auto s = open_out(o, "sim.csv");
      write_sim_csv(s, res.first_run);
    }
  }
  out << text << "\n";
  return kExitOk;
}

int cmd_example(const Options& o, std::ostream& out) {
  const auto& preset = find_preset(o.example_id);
  CompareOptions opts;
  opts.fluid.dt = o.dt;
  opts.sample_dt = o.sample_dt;
  opts.seed = o.seed;
  opts.replications = o.replications;
  opts.target_level = level_of(o);
  const auto rep = run_example(preset, opts);
  const auto dir = o.out_dir.empty() ? std::filesystem::path("runs") / preset.id : std::filesystem::path(o.out_dir);
  write_example(rep, preset, dir);
  out << to_json(rep).dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto base = load_params(o);
  SweepOptions opts;
  opts.param = o.sweep_param;
  opts.grid = make_grid(o.from, o.to, o.step);
  opts.fluid.dt = o.dt;
  opts.fluid.T = o.T.value_or(opts.fluid.T);
  validate(opts.fluid);
  opts.seeds = o.seeds;
  opts.sim_T = opts.fluid.T;
  opts.sample_dt = o.sample_dt;
  opts.seed = o.seed;
  const auto res = conjecture_probe(base, opts);
  auto emit = [&](std::ostream& s) {
    if (o.format == "json") {
      s << to_json(res).dump(2) << "\n";
    } else {
      write_sweep_csv(s, res);
    }
  };
  if (!o.out_dir.empty()) {
    auto f = open_out(o, o.format == "json" ? "sweep.json" : "sweep.csv");
    emit(f);
  }
  emit(out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agent-invitation queue: stability, fluid limits and simulation"};
  app.require_subcommand(1);
  Options o;

  auto* stab = app.add_subcommand("stability", "stability report (JSON) for a parameter set");
  add_param_options(stab, o);
  stab->add_option("--out", o.out_dir, "output directory");

  auto* fluid = app.add_subcommand("fluid", "integrate the fluid model and emit its trajectory");
  add_param_options(fluid, o);
  add_run_options(fluid, o);
  fluid->add_flag("--unbounded", o.unbounded, "drop the reflecting boundary");
  fluid->add_flag("--raw", o.raw, "emit t,X,Y,V,Z instead of centered t,x,y,v");
  fluid->add_option("--format", o.format, "csv (trajectory) or json (verdict)")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "simulate the queueing process");
  add_param_options(sim, o);
  add_run_options(sim, o);
  sim->add_flag("--centered", o.centered, "emit centered t,x,y,v instead of raw counts");

  auto* cmp = app.add_subcommand("compare", "simulate replications and compare against the fluid path");
  add_param_options(cmp, o);
  add_run_options(cmp, o);
  cmp->add_option("--replications", o.replications, "independent simulation runs");
  cmp->add_flag("--unbounded", o.unbounded, "compare against the boundary-free fluid system");

  auto* ex = app.add_subcommand("example", "run a preset end to end and write its artifacts");
  ex->add_option("id", o.example_id, "preset id")->required();
  ex->add_option("--out", o.out_dir, "output directory (default runs/<id>)");
  ex->add_option("--replications", o.replications, "independent simulation runs");
  ex->add_option("--seed", o.seed, "random seed");
  ex->add_option("--dt", o.dt, "fluid integration step");
  ex->add_option("--sample-dt", o.sample_dt, "simulation output grid spacing");
  ex->add_option("--target-level", o.target_level, "before or after");

  auto* sweep = app.add_subcommand("sweep", "vary gamma or epsilon and probe local vs global stability");
  add_param_options(sweep, o);
  sweep->add_option("--param", o.sweep_param, "gamma or epsilon")->check(CLI::IsMember({"gamma", "epsilon"}));
  sweep->add_option("--from", o.from, "first grid value");
  sweep->add_option("--to", o.to, "last grid value");
  sweep->add_option("--step", o.step, "grid increment");
  sweep->add_option("--seeds", o.seeds, "simulated replications per grid value (0 skips simulation)");
  sweep->add_option("-T,--T", o.T, "fluid horizon");
  sweep->add_option("--dt", o.dt, "fluid integration step");
  sweep->add_option("--sample-dt", o.sample_dt, "simulation output grid spacing");
  sweep->add_option("--seed", o.seed, "random seed");
  sweep->add_option("--out", o.out_dir, "output directory");
  sweep->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* list = app.add_subcommand("list", "list example presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    if (*stab) return cmd_stability(o, out);
    if (*fluid) return cmd_fluid(o, out, err);
    if (*sim) return cmd_simulate(o, out);
    if (*cmp) return cmd_compare(o, out);
    if (*ex) return cmd_example(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*list) {
      for (const auto& p : presets()) fmt::print(out, "{:10} {}\n", p.id, p.note);
      return kExitOk;
    }
  } catch (const ModelError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace agentinv
