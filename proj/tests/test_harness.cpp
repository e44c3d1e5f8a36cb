#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "agentinv/cli.hpp"
#include "agentinv/harness.hpp"
#include "doctest.h"

using namespace agentinv;
using nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "agentinv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("agentinv_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("preset catalogue") {
  const auto& all = presets();
  CHECK(all.size() == 15);
  CHECK(find_preset("ex1b").initial.Y == 2000);
  CHECK(find_preset("ex4g2.3").params.gamma == 2.3);
  CHECK(find_preset("ex4g20").scheme == Scheme::actual);
  CHECK_FALSE(find_preset("ex5-set1").published);
  CHECK_THROWS_AS(find_preset("ex9"), ModelError);
  for (const auto& p : all) CHECK_NOTHROW(validate(p.params));
}

TEST_CASE("effective initial state for the actual scheme") {
  SimState s;
  s.x_target = 999.5;
  const auto e = effective_initial(s, Scheme::actual);
  CHECK(e.X == 1000);
  CHECK(*e.x_target == 999.5);
  CHECK_FALSE(effective_initial(s, Scheme::stylized).x_target);
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; }, 4);
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw ModelError("boom");
                  }, 3),
                  ModelError);
}

TEST_CASE("first example: fluid converges and the simulation tracks it") {
  CompareOptions opts;
  opts.replications = 3;
  const auto rep = run_example(find_preset("ex1a"), opts);
  CHECK(rep.bounded.fluid_verdict.converged);
  CHECK(rep.bounded.sims.replications == 3);
  CHECK(rep.bounded.sims.median_sup_dist < 0.25);
  CHECK(rep.bounded.sims.converged_fraction == 1.0);
  REQUIRE(rep.unbounded_verdict);
  CHECK(rep.unbounded_verdict->converged);

  const auto j = to_json(rep);
  CHECK(j["fluid"]["converged"] == true);
  CHECK(j["cond_i"] == true);
  CHECK(j["converged"] == true);
}

TEST_CASE("boundary contact in case (b)") {
  CompareOptions opts;
  opts.replications = 0;
  const auto rep = run_example(find_preset("ex1b"), opts);
  CHECK(rep.bounded.boundary_contacts >= 1);
  CHECK(rep.bounded.fluid_verdict.converged);
}

TEST_CASE("second example with unit gain oscillates") {
  CompareOptions opts;
  opts.replications = 0;
  const auto rep = run_example(find_preset("ex2g1"), opts);
  CHECK_FALSE(rep.bounded.fluid_verdict.converged);
  CHECK_FALSE(rep.stability.cond_i);
}

TEST_CASE("moderate gain under the actual scheme stays close to the fluid path") {
  auto mean_gap_ratio = [](const SimRun& run) {
    double gap = 0.0, level = 0.0;
    for (const auto& s : run.samples) {
      gap += static_cast<double>(s.X) - *s.x_target;
      level += static_cast<double>(s.X);
    }
    return gap / level;
  };
  CompareOptions opts;
  opts.replications = 2;
  opts.fluid.T = 30.0;
  opts.scheme = Scheme::actual;
  const auto& moderate = find_preset("ex4g2.3");
  const auto res = compare_runs(moderate.params, moderate.initial, opts);
  CHECK(res.sims.invariant_violations == 0);
  CHECK(res.sims.median_sup_dist < 0.3);
  // Pending agents hover just above their target.
  CHECK(mean_gap_ratio(res.first_run) < 0.05);

  const auto& large = find_preset("ex4g20");
  const auto big = compare_runs(large.params, large.initial, opts);
  CHECK(mean_gap_ratio(big.first_run) > 4.0 * mean_gap_ratio(res.first_run));
}

TEST_CASE("artifact parameter sets reach the boundary and converge") {
  for (const char* id : {"ex5-set1", "ex5-set2"}) {
    const auto& preset = find_preset(id);
    CHECK(condition_i(preset.params).satisfied);
    CompareOptions opts;
    opts.replications = 0;
    const auto rep = run_example(preset, opts);
    CHECK(rep.bounded.boundary_contacts >= 1);
    CHECK(rep.bounded.fluid_verdict.converged);
  }
}

TEST_CASE("grids and battery") {
  const auto g = make_grid(1.0, 2.0, 0.1);
  CHECK(g.size() == 11);
  CHECK(g.back() == doctest::Approx(2.0));
  CHECK_THROWS_AS(make_grid(2.0, 1.0, 0.1), ModelError);
  const auto& p = find_preset("ex1a").params;
  const auto b = initial_battery(p);
  REQUIRE(b.size() == 5);
  CHECK(b[0].x == doctest::Approx(-1.0 / 3.0));
  CHECK(b[1].y == doctest::Approx(2.0));
}

TEST_CASE("gain sweep on the second example") {
  SweepOptions opts;
  opts.grid = {5.0, 8.7, 8.9, 10.0, 20.0};
  const auto res = conjecture_probe(find_preset("ex2g1").params, opts);
  REQUIRE(res.entries.size() == 5);
  CHECK_FALSE(res.entries[1].cond_i);
  CHECK(res.entries[2].cond_i);
  CHECK(res.entries[3].fluid_converged);
  CHECK(res.entries[4].fluid_converged);
  CHECK(res.counterexamples.empty());
  // Gain 5 misses the sufficient conditions yet settles.
  CHECK(res.entries[0].fluid_converged);
  CHECK(std::find(res.sufficient_only.begin(), res.sufficient_only.end(), 5.0) != res.sufficient_only.end());

  SweepOptions bad = opts;
  bad.param = "mu";
  CHECK_THROWS_AS(conjecture_probe(find_preset("ex2g1").params, bad), ModelError);
}

TEST_CASE("first example family shows no counterexample") {
  SweepOptions opts;
  opts.grid = make_grid(0.5, 3.0, 0.5);
  opts.fluid.T = 100.0;
  const auto res = conjecture_probe(find_preset("ex1a").params, opts);
  CHECK(res.counterexamples.empty());
  for (const auto& e : res.entries) CHECK(e.fluid_converged);
}

TEST_CASE("csv writers") {
  Trajectory tr{0.5, {{0, 0, 0}, {0.1, -0.2, 0.3}}, TrajectoryKind::fluid_bounded};
  std::ostringstream out;
  write_centered_csv(out, tr);
  CHECK(out.str().rfind("t,x,y,v\n", 0) == 0);

  const auto& p = find_preset("ex1a").params;
  std::ostringstream raw;
  write_fluid_csv(raw, tr, p, true);
  CHECK(raw.str().rfind("t,X,Y,V,Z\n", 0) == 0);

  SimRun run;
  SimState s;
  s.X = 3;
  s.Y = -1;
  s.Z = 2;
  run.sample_dt = 0.1;
  run.samples = {s};
  std::ostringstream sim;
  write_sim_csv(sim, run);
  CHECK(sim.str() == "t,X,Y,Z,Xtarget\n0,3,-1,2,\n");
}

TEST_CASE("cli: stability") {
  auto r = cli({"stability", "--preset", "ex2g5"});
  REQUIRE(r.code == kExitOk);
  auto j = json::parse(r.out);
  CHECK(j["cond_i"] == false);
  CHECK(j["cond_ii"] == false);
  CHECK(j["thresholds"]["cond_i_drift"].get<double>() == doctest::Approx(8.8).epsilon(1e-12));

  r = cli({"stability", "--preset", "ex2g5", "--set", "gamma=10"});
  j = json::parse(r.out);
  CHECK(j["cond_i"] == true);
  CHECK(j["cqlf_exists"] == true);
}

TEST_CASE("cli: parameter files and errors") {
  const auto dir = scratch("params");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "p.txt");
    f << "lambda = 2\nr = 1000\nalpha = 0.5\nbeta = 3\nmu = 2\ndelta = 1\ntheta = 0.1\ngamma = 1\nepsilon = 1.5\n";
  }
  auto r = cli({"stability", "--params", (dir / "p.txt").string()});
  CHECK(r.code == kExitOk);
  CHECK(json::parse(r.out)["cond_i"] == true);

  r = cli({"stability", "--params", (dir / "p.txt").string(), "--set", "alpha=1"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("alpha must lie in [0,1)") != std::string::npos);

  r = cli({"stability"});
  CHECK(r.code == kExitUsage);

  r = cli({"frobnicate"});
  CHECK(r.code == kExitUsage);

  r = cli({"example", "nope"});
  CHECK(r.code == kExitUsage);
}

TEST_CASE("cli: fluid") {
  auto r = cli({"fluid", "--preset", "ex1a", "-T", "1", "--dt", "0.01"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y,v");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 101);

  r = cli({"fluid", "--preset", "ex1a", "-T", "1", "--dt", "0.01", "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j.contains("converged"));

  r = cli({"fluid", "--preset", "ex1a", "-T", "1", "--initial", "-5000,0,0"});
  CHECK(r.code == kExitUsage);

  r = cli({"fluid", "--preset", "ex1a", "--unbounded", "--dt", "50", "-T", "100000"});
  CHECK(r.code == kExitNumerical);
}

TEST_CASE("cli: simulate is reproducible") {
  const auto a = cli({"simulate", "--preset", "ex1a", "-T", "1", "--seed", "9"});
  const auto b = cli({"simulate", "--preset", "ex1a", "-T", "1", "--seed", "9"});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("t,X,Y,Z,Xtarget\n", 0) == 0);
  const auto c = cli({"simulate", "--preset", "ex1a", "-T", "1", "--seed", "10"});
  CHECK(a.out != c.out);
}

TEST_CASE("cli: example writes its artifacts") {
  const auto dir = scratch("example");
  auto r = cli({"example", "ex1a", "--out", dir.string(), "--replications", "2"});
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"params.txt", "stability.json", "fluid.csv", "sim.csv", "report.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["fluid"]["converged"] == true);

  // Same inputs and seed give identical files.
  const auto again = scratch("example_again");
  REQUIRE(cli({"example", "ex1a", "--out", again.string(), "--replications", "2"}).code == kExitOk);
  for (const char* f : {"fluid.csv", "sim.csv", "report.json"}) CHECK(slurp(dir / f) == slurp(again / f));
}

TEST_CASE("cli: sweep") {
  auto r = cli({"sweep", "--preset", "ex2g1", "--param", "gamma", "--from", "8.5", "--to", "9", "--step",
                "0.5", "-T", "50"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header.rfind("gamma,cond_i", 0) == 0);
  CHECK(first.rfind("8.5,0,", 0) == 0);
  CHECK(second.rfind("9,1,", 0) == 0);
}

TEST_CASE("cli: list") {
  const auto r = cli({"list"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("ex4g2.3") != std::string::npos);
}
