#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agentinv/fluid.hpp"
#include "agentinv/harness.hpp"
#include "agentinv/simulator.hpp"
#include "agentinv/stability.hpp"

namespace py = pybind11;
using namespace agentinv;

namespace {

py::list matrix_rows(const Mat3& m) {
  py::list rows;
  for (int i = 0; i < 3; ++i) rows.append(py::make_tuple(m(i, 0), m(i, 1), m(i, 2)));
  return rows;
}

py::dict trajectory_dict(const Trajectory& tr) {
  std::vector<double> t, x, y, v;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    t.push_back(tr.time(i));
    x.push_back(tr.states[i].x);
    y.push_back(tr.states[i].y);
    v.push_back(tr.states[i].v);
  }
  py::dict d;
  d["t"] = t;
  d["x"] = x;
  d["y"] = y;
  d["v"] = v;
  d["kind"] = to_string(tr.kind);
  return d;
}

SimState raw_state(std::int64_t X, std::int64_t Y, std::int64_t Z, std::optional<double> target) {
  SimState s;
  s.X = X;
  s.Y = Y;
  s.Z = Z;
  s.x_target = target;
  return s;
}

// JSON documents cross the boundary as Python objects via the json module.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_agentinv, m) {
  m.doc() = "Fluid model, stability tests and simulator for agent invitation in service systems";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double lambda, std::int64_t r, double alpha, double beta, double mu, double delta,
                       double theta, double gamma, double epsilon) {
             return ModelParams{lambda, r, alpha, beta, mu, delta, theta, gamma, epsilon};
           }),
           py::arg("lam"), py::arg("r"), py::arg("alpha"), py::arg("beta"), py::arg("mu"), py::arg("delta"),
           py::arg("theta"), py::arg("gamma"), py::arg("epsilon"))
      .def_readwrite("lam", &ModelParams::lambda)
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("delta", &ModelParams::delta)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("epsilon", &ModelParams::epsilon)
      .def("x_boundary", &ModelParams::x_boundary);

  m.def("preset_params", [](const std::string& id) { return find_preset(id).params; }, py::arg("id"));
  m.def("preset_ids", [] {
    std::vector<std::string> ids;
    for (const auto& p : presets()) ids.push_back(p.id);
    return ids;
  });

  m.def("validate", [](const ModelParams& p) { return validate(p); }, py::arg("params"));

  m.def("to_centered",
        [](std::int64_t X, std::int64_t Y, std::int64_t Z, const ModelParams& p) {
          const auto c = to_centered(raw_state(X, Y, Z, std::nullopt), p);
          return py::make_tuple(c.x, c.y, c.v);
        },
        py::arg("X"), py::arg("Y"), py::arg("Z"), py::arg("params"));

  m.def("from_centered",
        [](double x, double y, double v, const ModelParams& p) {
          const auto r = from_centered({x, y, v}, p);
          return py::make_tuple(r.X, r.Y, r.V);
        },
        py::arg("x"), py::arg("y"), py::arg("v"), py::arg("params"));

  m.def("build_matrices",
        [](const ModelParams& p) {
          const auto pair = build_matrices(p);
          return py::make_tuple(matrix_rows(pair.a1), matrix_rows(pair.a2));
        },
        py::arg("params"));

  m.def("char_poly",
        [](const ModelParams& p, bool upper) {
          const auto pair = build_matrices(p);
          const auto c = char_poly(upper ? pair.a1 : pair.a2);
          return py::make_tuple(c.c0, c.c1, c.c2, c.c3);
        },
        py::arg("params"), py::arg("upper") = true);

  m.def("stability_report", [](const ModelParams& p) { return to_python(to_json(stability_report(p))); },
        py::arg("params"));

  m.def("integrate",
        [](std::tuple<double, double, double> s0, const ModelParams& p, double dt, double T, bool bounded) {
          FluidConfig cfg;
          cfg.dt = dt;
          cfg.T = T;
          cfg.bounded = bounded;
          const auto [x, y, v] = s0;
          const auto tr = integrate({x, y, v}, p, cfg);
          auto d = trajectory_dict(tr);
          const auto verdict = detect_convergence(tr, cfg);
          d["converged"] = verdict.converged;
          d["t_conv"] = verdict.t_conv;
          d["boundary_contacts"] = boundary_contacts(tr, p);
          return d;
        },
        py::arg("s0"), py::arg("params"), py::arg("dt") = 1e-3, py::arg("T") = 100.0, py::arg("bounded") = true);

  m.def("simulate",
        [](const ModelParams& p, std::tuple<std::int64_t, std::int64_t, std::int64_t> initial, double T,
           double sample_dt, std::uint64_t seed, const std::string& scheme, std::optional<double> x_target) {
          SimConfig cfg;
          cfg.T = T;
          cfg.sample_dt = sample_dt;
          cfg.seed = seed;
          cfg.scheme = parse_scheme(scheme);
          const auto [X, Y, Z] = initial;
          cfg.initial = raw_state(X, Y, Z, x_target);
          const auto out = run(cfg, p);
          std::vector<std::int64_t> xs, ys, zs;
          for (const auto& s : out.samples) {
            xs.push_back(s.X);
            ys.push_back(s.Y);
            zs.push_back(s.Z);
          }
          auto d = trajectory_dict(out.centered);
          d["X"] = xs;
          d["Y"] = ys;
          d["Z"] = zs;
          d["events"] = out.events;
          d["invariant_violations"] = out.invariant_violations;
          return d;
        },
        py::arg("params"), py::arg("initial") = std::make_tuple(0, 0, 0), py::arg("T") = 100.0,
        py::arg("sample_dt") = 0.01, py::arg("seed") = 1, py::arg("scheme") = "stylized",
        py::arg("x_target") = py::none());

  m.def("compare",
        [](const std::string& preset_id, std::size_t replications, std::uint64_t seed, std::optional<double> T) {
          const auto& preset = find_preset(preset_id);
          CompareOptions opts;
          opts.replications = replications;
          opts.seed = seed;
          opts.scheme = preset.scheme;
          opts.fluid.T = T.value_or(preset.horizon);
          return to_python(to_json(compare_runs(preset.params, preset.initial, opts)));
        },
        py::arg("preset"), py::arg("replications") = 20, py::arg("seed") = 1, py::arg("T") = py::none());
}
