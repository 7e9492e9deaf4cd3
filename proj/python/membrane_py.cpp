#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "membrane/energy.hpp"
#include "membrane/errors.hpp"
#include "membrane/flow.hpp"
#include "membrane/geometry.hpp"
#include "membrane/harness.hpp"
#include "membrane/materials.hpp"
#include "membrane/recovery.hpp"
#include "membrane/shapes.hpp"

namespace py = pybind11;
using namespace membrane;

namespace {

Curve make_curve(std::vector<double> x, std::vector<double> y, double param_length) {
  if (param_length <= 0.0) {
    param_length = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) param_length += std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]);
  }
  GeometryOptions go;
  go.speed_tol = 1.0;
  return build_curve(std::move(x), std::move(y), param_length, go);
}

py::dict breakdown(const EnergyBreakdown& e) {
  py::dict d;
  d["total"] = e.total;
  d["helfrich"] = e.helfrich;
  d["interface_gradient"] = e.interface_gradient;
  d["interface_well"] = e.interface_well;
  d["interface_bending"] = e.interface_bending;
  d["area"] = e.area;
  d["phase_integral"] = e.phase_integral;
  d["volume"] = e.volume;
  return d;
}

py::dict shape_dict(const Curve& c, const PhaseField& u) {
  py::dict d;
  d["x"] = c.x;
  d["y"] = c.y;
  d["u"] = u;
  return d;
}

MaterialModel model_from(const py::object& material) {
  if (material.is_none()) return make_default_model();
  return harness::make_model(material.cast<harness::MaterialConfig>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Axisymmetric two-phase membranes: energies, recovery sequences and gradient flows";

  static py::exception<Error> error(m, "MembraneError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::enum_<Variant>(m, "Variant")
      .value("F_eps", Variant::F_eps)
      .value("E_eps", Variant::E_eps)
      .value("Fhat_eps", Variant::Fhat_eps);

  py::class_<Curve>(m, "Curve")
      .def(py::init(&make_curve), py::arg("x"), py::arg("y"), py::arg("param_length") = 0.0)
      .def_readonly("x", &Curve::x)
      .def_readonly("y", &Curve::y)
      .def_readonly("param_length", &Curve::param_length)
      .def_readonly("speed", &Curve::speed)
      .def("__len__", &Curve::size);

  py::class_<harness::LawConfig>(m, "Law")
      .def(py::init<double, double>(), py::arg("minus"), py::arg("plus"))
      .def_readwrite("minus", &harness::LawConfig::minus)
      .def_readwrite("plus", &harness::LawConfig::plus);

  py::class_<harness::MaterialConfig>(m, "Material")
      .def(py::init<>())
      .def_readwrite("well", &harness::MaterialConfig::well)
      .def_readwrite("well_scale", &harness::MaterialConfig::well_scale)
      .def_readwrite("k", &harness::MaterialConfig::k)
      .def_readwrite("kG", &harness::MaterialConfig::kG)
      .def_readwrite("Hs", &harness::MaterialConfig::Hs)
      .def_readwrite("C0", &harness::MaterialConfig::C0);

  m.def("sigma_constants", [](const py::object& material) {
    const auto mm = model_from(material);
    return py::make_tuple(mm.sigma, mm.sigma_hat);
  }, py::arg("material") = py::none(), "Line tensions (sigma, sigma_hat) of the double well");

  m.def("sphere", [](std::size_t n, double r) { return shapes::sphere(n, r); }, py::arg("nodes"), py::arg("radius") = 1.0);
  m.def("capped_cylinder", [](std::size_t n) {
    const auto c = shapes::capped_cylinder(n);
    return py::make_tuple(c, shapes::capped_cylinder_phase(c));
  }, py::arg("nodes"));
  m.def("dumbbell", [](std::size_t n, double l, double h, double eps) {
    auto s = shapes::dumbbell(n, l, h, eps);
    return py::make_tuple(s.curve, s.phase);
  }, py::arg("nodes"), py::arg("l"), py::arg("h"), py::arg("eps"));
  m.def("rectangular_signal", [](std::size_t n, int k, double c, double tilt) {
    auto s = shapes::rectangular_signal(n, k, c, tilt);
    py::dict d;
    d["curve"] = s.curve;
    d["phase"] = s.phase;
    d["eps"] = s.eps;
    d["window_length"] = s.window_length;
    d["window"] = py::make_tuple(s.window_first, s.window_last);
    return d;
  }, py::arg("nodes"), py::arg("k"), py::arg("c"), py::arg("tilt") = 0.0);
  m.def("random_closed", [](std::size_t n, std::uint64_t seed, double amp) {
    auto s = shapes::random_closed(n, seed, amp);
    return py::make_tuple(s.curve, s.phase);
  }, py::arg("nodes"), py::arg("seed"), py::arg("amplitude") = 0.05);

  m.def("measures", [](const Curve& c) {
    const auto w = measures(c);
    py::dict d;
    d["area"] = w.area;
    d["volume"] = w.volume;
    d["length"] = w.length;
    d["weights"] = w.w;
    return d;
  });
  m.def("curvatures", [](const Curve& c) {
    const auto k = curvatures(c);
    py::dict d;
    d["kappa1"] = k.kappa1;
    d["kappa2"] = k.kappa2;
    d["H"] = k.H;
    d["K"] = k.K;
    d["B2"] = k.B2;
    return d;
  });
  m.def("angle", [](const Curve& c) { return angle_function(c).phi; });
  m.def("reparametrize", [](const Curve& c, const PhaseField& u, std::size_t n) {
    auto r = reparametrize_with_field(c, u, n);
    return py::make_tuple(r.curve, r.field);
  }, py::arg("curve"), py::arg("phase"), py::arg("nodes") = 0);

  m.def("energy", [](const Curve& c, const PhaseField& u, double eps, Variant v, const py::object& material) {
    return breakdown(total_energy(c, u, model_from(material), eps, v));
  }, py::arg("curve"), py::arg("phase"), py::arg("eps"), py::arg("variant") = Variant::F_eps,
     py::arg("material") = py::none());

  m.def("gradient", [](const Curve& c, const PhaseField& u, double eps, Variant v, const py::object& material) {
    EnergyOptions eo;
    eo.eps = eps;
    eo.variant = v;
    const auto g = discrete_gradient(c, u, model_from(material), eo);
    py::dict d;
    d["dx"] = g.dx;
    d["dy"] = g.dy;
    d["du"] = g.du;
    d["energy"] = breakdown(g.energy);
    return d;
  }, py::arg("curve"), py::arg("phase"), py::arg("eps"), py::arg("variant") = Variant::F_eps,
     py::arg("material") = py::none(), "Discrete gradient; du is taken in the weighted phase metric");

  m.def("recovery", [](const std::string& membrane, double eps, double jump, std::size_t nodes,
                       const py::object& material) {
    RecoveryOptions o;
    o.nodes = nodes;
    const auto r = build_recovery(harness::builtin_membrane(membrane, jump), eps, model_from(material), o);
    py::dict d = shape_dict(r.curve, r.phase);
    d["energy"] = breakdown(r.report.energy);
    d["limit"] = breakdown(r.report.limit);
    d["gap"] = r.report.gap;
    return d;
  }, py::arg("membrane"), py::arg("eps"), py::arg("jump") = 1.0, py::arg("nodes") = 0,
     py::arg("material") = py::none(), "Recovery sequence member of a builtin limit membrane");

  m.def("evolve", [](const Curve& c, const PhaseField& u, Variant v, double eps, std::size_t max_steps,
                     double stationarity_tol, const py::object& material) {
    FlowConfig cfg;
    cfg.variant = v;
    cfg.eps = eps;
    cfg.max_steps = max_steps;
    cfg.stationarity_tol = stationarity_tol;
    const auto mm = model_from(material);
    FlowResult res;
    {
      py::gil_scoped_release release;
      res = evolve_to_stationary(make_flow_state(c, u, mm, cfg), mm, cfg);
    }
    py::dict d = shape_dict(res.state.curve, res.state.phase);
    d["curve"] = res.state.curve;
    d["status"] = to_string(res.status);
    d["steps"] = res.state.step_count;
    d["energy"] = breakdown(res.state.energy);
    d["grad_norm"] = res.final_grad_norm;
    d["max_constraint_drift"] = res.max_constraint_drift;
    std::vector<double> energies;
    for (const auto& r : res.trajectory) energies.push_back(r.energy.total);
    d["energies"] = energies;
    return d;
  }, py::arg("curve"), py::arg("phase"), py::arg("variant") = Variant::F_eps, py::arg("eps") = 0.05,
     py::arg("max_steps") = 20000, py::arg("stationarity_tol") = 1e-6, py::arg("material") = py::none());

  m.def("builtin_scenarios", &harness::builtin_scenario_names);
  m.def("scenario_json", [](const std::string& name) { return harness::to_json(harness::load_scenario(name)); });
  m.def("run_scenario", [](const std::string& scenario_json, const std::string& root) {
    const auto s = harness::scenario_from_json(scenario_json);
    harness::RunSummary r;
    {
      py::gil_scoped_release release;
      r = harness::run_scenario(s, root.empty() ? harness::output_root() : std::filesystem::path(root));
    }
    py::dict d;
    d["dir"] = r.dir.string();
    py::list runs;
    for (const auto& run : r.runs) {
      py::dict e;
      e["variant"] = to_string(run.variant);
      e["status"] = to_string(run.result.status);
      e["energy"] = run.result.state.energy.total;
      e["dir"] = run.dir.string();
      runs.append(e);
    }
    d["runs"] = runs;
    return d;
  }, py::arg("scenario_json"), py::arg("root") = "");
  m.def("compare_runs", [](const std::vector<std::string>& dirs) {
    std::vector<std::filesystem::path> p(dirs.begin(), dirs.end());
    return harness::compare_runs(p).markdown;
  });
  m.def("validate", [] {
    py::list out;
    for (const auto& c : harness::validate_invariants()) out.append(py::make_tuple(c.name, c.pass, c.detail));
    return out;
  });
}
