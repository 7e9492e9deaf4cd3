#include "membrane/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "membrane/errors.hpp"
#include "membrane/recovery.hpp"
#include "membrane/shapes.hpp"

namespace membrane::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- json

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(ErrorCode::InvalidArgument, "unknown key '" + key + "' in section '" + section + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json law_json(const LawConfig& l) { return json{{"minus", l.minus}, {"plus", l.plus}}; }

LawConfig law_from(const json& j, LawConfig def) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  check_keys(j, {"minus", "plus"}, "law");
  read(j, "minus", def.minus);
  read(j, "plus", def.plus);
  return def;
}

json flow_json(const FlowConfig& f) {
  return json{{"eps", f.eps},
              {"bending_exponent", f.bending_exponent},
              {"dt_init", f.dt_init},
              {"dt_min", f.dt_min},
              {"dt_max", f.dt_max},
              {"stationarity_tol", f.stationarity_tol},
              {"constraint_tol", f.constraint_tol},
              {"max_steps", f.max_steps},
              {"reparam_interval", f.reparam_interval},
              {"semi_implicit", f.semi_implicit},
              {"curve_metric", to_string(f.curve_metric)},
              {"phase_metric_scale", f.phase_metric_scale},
              {"fix_volume", f.fix_volume},
              {"pinch_tol", f.pinch_tol},
              {"grow", f.grow},
              {"shrink", f.shrink},
              {"log_every", f.log_every}};
}

FlowConfig flow_from(const json& j) {
  check_keys(j,
             {"eps", "bending_exponent", "dt_init", "dt_min", "dt_max", "stationarity_tol", "constraint_tol",
              "max_steps", "reparam_interval", "semi_implicit", "curve_metric", "phase_metric_scale", "fix_volume",
              "pinch_tol", "grow", "shrink", "log_every"},
             "flow");
  FlowConfig f;
  read(j, "eps", f.eps);
  read(j, "bending_exponent", f.bending_exponent);
  read(j, "dt_init", f.dt_init);
  read(j, "dt_min", f.dt_min);
  read(j, "dt_max", f.dt_max);
  read(j, "stationarity_tol", f.stationarity_tol);
  read(j, "constraint_tol", f.constraint_tol);
  read(j, "max_steps", f.max_steps);
  read(j, "reparam_interval", f.reparam_interval);
  read(j, "semi_implicit", f.semi_implicit);
  if (j.contains("curve_metric")) f.curve_metric = parse_curve_metric(j.at("curve_metric").get<std::string>());
  read(j, "phase_metric_scale", f.phase_metric_scale);
  read(j, "fix_volume", f.fix_volume);
  read(j, "pinch_tol", f.pinch_tol);
  read(j, "grow", f.grow);
  read(j, "shrink", f.shrink);
  read(j, "log_every", f.log_every);
  return f;
}

// ---------------------------------------------------------------- csv / svg

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
  return f;
}

struct Series {
  std::string name;
  std::vector<double> x, y;
};

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

void write_svg(const fs::path& p, const std::string& title, const std::string& xlabel, const std::string& ylabel,
               const std::vector<Series>& series, bool equal_aspect = false, bool log_axes = false) {
  const double W = 720, H = 440, ml = 70, mr = 150, mt = 40, mb = 50;
  const auto tr = [&](double v) { return log_axes ? std::log10(v) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tr(s.x[i])) || !std::isfinite(tr(s.y[i]))) continue;
      x0 = std::min(x0, tr(s.x[i]));
      x1 = std::max(x1, tr(s.x[i]));
      y0 = std::min(y0, tr(s.y[i]));
      y1 = std::max(y1, tr(s.y[i]));
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pw = W - ml - mr, ph = H - mt - mb;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  if (equal_aspect) sx = sy = std::min(sx, sy);
  const auto X = [&](double v) { return ml + (tr(v) - x0) * sx; };
  const auto Y = [&](double v) { return mt + ph - (tr(v) - y0) * sy; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  auto f = open_out(p);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << ml << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    const double px = ml + (xv - x0) * sx, py = mt + ph - (yv - y0) * sy;
    const std::string xs = fmt_tick(log_axes ? std::pow(10.0, xv) : xv);
    const std::string ys = fmt_tick(log_axes ? std::pow(10.0, yv) : yv);
    if (px <= ml + pw + 1e-9)
      f << "<text x=\"" << px << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">" << xs << "</text>\n";
    if (py >= mt - 1e-9)
      f << "<text x=\"" << ml - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << ys << "</text>\n";
  }
  f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  f << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" transform=\"rotate(-90 16 " << mt + ph / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    f << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tr(s.x[i])) || !std::isfinite(tr(s.y[i]))) continue;
      f << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    }
    f << "\"/>\n";
    f << "<text x=\"" << W - mr + 12 << "\" y=\"" << mt + 16 + 18 * k << "\" fill=\"" << col << "\">" << s.name
      << "</text>\n";
  }
  f << "</svg>\n";
}

std::vector<double> arclength(const Curve& c) {
  std::vector<double> s(c.size(), 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) s[i] = s[i - 1] + c.chord(i - 1);
  return s;
}

// ---------------------------------------------------------------- pool

template <class F>
void run_pool(std::size_t jobs, std::size_t workers, F&& job) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- initial data

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;

  const std::vector<double>* column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return &cols[i];
    return nullptr;
  }
};

CsvTable read_csv(const fs::path& p) {
  std::ifstream f(p);
  if (!f) fail(ErrorCode::Io, "cannot read " + p.string());
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) fail(ErrorCode::Io, p.string() + " is empty");
  std::stringstream hs(line);
  for (std::string h; std::getline(hs, h, ',');) {
    h.erase(std::remove_if(h.begin(), h.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); }),
            h.end());
    t.header.push_back(h);
  }
  t.cols.resize(t.header.size());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t k = 0;
    for (std::string v; std::getline(ls, v, ','); ++k) {
      if (k >= t.cols.size()) fail(ErrorCode::Io, p.string() + ": too many columns");
      try {
        t.cols[k].push_back(std::stod(v));
      } catch (const std::exception&) {
        fail(ErrorCode::Io, p.string() + ": bad number '" + v + "'");
      }
    }
    if (k != t.cols.size()) fail(ErrorCode::Io, p.string() + ": short row");
  }
  return t;
}

void add_noise(Curve& c, double noise, std::uint64_t seed) {
  if (noise == 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::array<double, 4> a{};
  for (auto& v : a) v = d(rng);
  const auto s = arclength(c);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    double g = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) g += a[j] * std::sin(static_cast<double>(j + 1) * kPi * s[i] / s.back());
    c.y[i] *= 1.0 + noise * g / static_cast<double>(a.size());
  }
}

json breakdown_json(const EnergyBreakdown& e) {
  return json{{"total", e.total},
              {"helfrich", e.helfrich},
              {"interface_gradient", e.interface_gradient},
              {"interface_well", e.interface_well},
              {"interface_bending", e.interface_bending},
              {"area", e.area},
              {"phase_integral", e.phase_integral},
              {"volume", e.volume}};
}

std::string label(Variant v) {
  switch (v) {
    case Variant::F_eps: return "F_eps";
    case Variant::E_eps: return "E_eps";
    case Variant::Fhat_eps: return "Fhat_eps";
  }
  return "F_eps";
}

// ---------------------------------------------------------------- writers

void write_trajectory(const fs::path& p, const std::vector<TrajectoryRow>& rows) {
  auto f = open_out(p);
  f << "step,time,dt,total,helfrich,interface_gradient,interface_well,interface_bending,area,phase_integral,volume,"
       "grad_norm,area_residual,phase_residual,max_phi_prime\n";
  for (const auto& r : rows) {
    const auto& e = r.energy;
    f << r.step << ',' << num(r.time) << ',' << num(r.dt) << ',' << num(e.total) << ',' << num(e.helfrich) << ','
      << num(e.interface_gradient) << ',' << num(e.interface_well) << ',' << num(e.interface_bending) << ','
      << num(e.area) << ',' << num(e.phase_integral) << ',' << num(e.volume) << ',' << num(r.grad_norm) << ','
      << num(r.area_residual) << ',' << num(r.phase_residual) << ',' << num(r.max_phi_prime) << '\n';
  }
}

void write_state(const fs::path& p, const Curve& c, const PhaseField& u) {
  const auto s = arclength(c);
  const auto phi = angle_function(c).phi;
  GeometryOptions go;
  go.pole_tangent_tol = kPi;
  const auto k = curvatures(c, go);
  auto f = open_out(p);
  f << "i,s,x,y,u,phi,kappa1,kappa2\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    f << i << ',' << num(s[i]) << ',' << num(c.x[i]) << ',' << num(c.y[i]) << ',' << num(u[i]) << ',' << num(phi[i])
      << ',' << num(k.kappa1[i]) << ',' << num(k.kappa2[i]) << '\n';
}

void write_state_plots(const fs::path& dir, const std::string& tag, const Curve& c, const PhaseField& u) {
  const auto s = arclength(c);
  const auto phi = angle_function(c).phi;
  Series upper{"y", c.x, c.y}, lower{"-y", c.x, c.y};
  for (auto& v : lower.y) v = -v;
  write_svg(dir / "cross_section.svg", "Cross-section " + tag, "x", "y", {upper, lower}, true);
  write_svg(dir / "angle.svg", "Angle " + tag, "arclength", "phi", {{"phi", s, phi}});
  write_svg(dir / "phase.svg", "Phase " + tag, "arclength", "u", {{"u", s, u}});
}

Curve curve_from_columns(const std::vector<double>& x, const std::vector<double>& y) {
  double L = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) L += std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]);
  GeometryOptions go;
  go.speed_tol = 1.0;
  go.pole_tangent_tol = kPi;
  return build_curve(x, y, L, go);
}

}  // namespace

// ---------------------------------------------------------------- model

MaterialModel make_model(const MaterialConfig& cfg) {
  const auto law = [](const LawConfig& l) {
    return l.minus == l.plus ? ScalarLaw::constant(l.minus) : quintic_spontaneous_curvature(l.minus, l.plus);
  };
  MaterialModel m = make_default_model();
  if (cfg.well == "quartic") m.W = DoubleWell::quartic(cfg.well_scale);
  else if (cfg.well == "table") m.W = DoubleWell::tabulated(cfg.table_u, cfg.table_w);
  else fail(ErrorCode::InvalidArgument, "unknown well '" + cfg.well + "'");
  m.k = law(cfg.k);
  m.kG = law(cfg.kG);
  m.Hs = law(cfg.Hs);
  m.C0 = cfg.C0;
  m.refresh_constants();
  return m;
}

// ---------------------------------------------------------------- scenarios

std::string to_json(const Scenario& s, int indent) {
  json variants = json::array();
  for (auto v : s.variants) variants.push_back(label(v));
  const auto& g = s.geometry;
  const auto& mt = s.material;
  const auto& st = s.study;
  json j{{"name", s.name},
         {"geometry",
          {{"shape", g.shape},
           {"nodes", g.nodes},
           {"radius", g.radius},
           {"length", g.length},
           {"diameter", g.diameter},
           {"periods", g.periods},
           {"signal_c", g.signal_c},
           {"tilt", g.tilt},
           {"file", g.file},
           {"noise", g.noise},
           {"seed", g.seed}}},
         {"phase", {{"kind", s.phase.kind}, {"value", s.phase.value}}},
         {"material",
          {{"well", mt.well},
           {"well_scale", mt.well_scale},
           {"table_u", mt.table_u},
           {"table_w", mt.table_w},
           {"k", law_json(mt.k)},
           {"kG", law_json(mt.kG)},
           {"Hs", law_json(mt.Hs)},
           {"C0", mt.C0}}},
         {"flow", flow_json(s.flow)},
         {"variants", variants},
         {"study",
          {{"kind", st.kind},
           {"eps", st.eps},
           {"membrane", st.membrane},
           {"jump", st.jump},
           {"lengths", st.lengths},
           {"periods", st.periods},
           {"nodes", st.nodes}}},
         {"output", {{"dir", s.output.dir}, {"plots", s.output.plots}, {"workers", s.output.workers}}}};
  return j.dump(indent);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, {"name", "geometry", "phase", "material", "flow", "variants", "study", "output"}, "scenario");
    Scenario s;
    read(j, "name", s.name);
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      check_keys(g, {"shape", "nodes", "radius", "length", "diameter", "periods", "signal_c", "tilt", "file", "noise", "seed"},
                 "geometry");
      read(g, "shape", s.geometry.shape);
      read(g, "nodes", s.geometry.nodes);
      read(g, "radius", s.geometry.radius);
      read(g, "length", s.geometry.length);
      read(g, "diameter", s.geometry.diameter);
      read(g, "periods", s.geometry.periods);
      read(g, "signal_c", s.geometry.signal_c);
      read(g, "tilt", s.geometry.tilt);
      read(g, "file", s.geometry.file);
      read(g, "noise", s.geometry.noise);
      read(g, "seed", s.geometry.seed);
    }
    if (j.contains("phase")) {
      const auto& p = j.at("phase");
      check_keys(p, {"kind", "value"}, "phase");
      read(p, "kind", s.phase.kind);
      read(p, "value", s.phase.value);
    }
    if (j.contains("material")) {
      const auto& m = j.at("material");
      check_keys(m, {"well", "well_scale", "table_u", "table_w", "k", "kG", "Hs", "C0"}, "material");
      read(m, "well", s.material.well);
      read(m, "well_scale", s.material.well_scale);
      read(m, "table_u", s.material.table_u);
      read(m, "table_w", s.material.table_w);
      if (m.contains("k")) s.material.k = law_from(m.at("k"), s.material.k);
      if (m.contains("kG")) s.material.kG = law_from(m.at("kG"), s.material.kG);
      if (m.contains("Hs")) s.material.Hs = law_from(m.at("Hs"), s.material.Hs);
      read(m, "C0", s.material.C0);
    }
    if (j.contains("flow")) s.flow = flow_from(j.at("flow"));
    if (j.contains("variants")) {
      s.variants.clear();
      for (const auto& v : j.at("variants")) s.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (j.contains("study")) {
      const auto& st = j.at("study");
      check_keys(st, {"kind", "eps", "membrane", "jump", "lengths", "periods", "nodes"}, "study");
      read(st, "kind", s.study.kind);
      read(st, "eps", s.study.eps);
      read(st, "membrane", s.study.membrane);
      read(st, "jump", s.study.jump);
      read(st, "lengths", s.study.lengths);
      read(st, "periods", s.study.periods);
      read(st, "nodes", s.study.nodes);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      check_keys(o, {"dir", "plots", "workers"}, "output");
      read(o, "dir", s.output.dir);
      read(o, "plots", s.output.plots);
      read(o, "workers", s.output.workers);
    }
    validate_config(s.flow);
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad scenario field: ") + e.what());
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"paper_fig_kink", "no_gauss", "gamma_ladder", "dumbbell", "rectangular_signal"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.flow.eps = 0.05;
  s.flow.max_steps = 4000;
  if (name == "paper_fig_kink" || name == "no_gauss") {
    s.geometry.shape = "capped_cylinder";
    s.geometry.nodes = 1024;
    s.variants = name == "no_gauss" ? std::vector<Variant>{Variant::Fhat_eps}
                                    : std::vector<Variant>{Variant::E_eps, Variant::F_eps};
    return s;
  }
  if (name == "gamma_ladder") {
    s.study.kind = "gamma_ladder";
    s.study.eps = {0.1, 0.05, 0.025, 0.0125};
    s.study.membrane = "sphere_with_interface";
    s.geometry.shape = "recovery";
    s.geometry.nodes = 0;
    s.flow.eps = 0.1;
    s.flow.max_steps = 100;
    return s;
  }
  if (name == "dumbbell") {
    s.study.kind = "dumbbell_scaling";
    s.study.lengths = {2.0, 4.0, 8.0};
    s.study.nodes = 40001;
    s.geometry.shape = "dumbbell";
    s.geometry.length = 2.0;
    s.geometry.nodes = 2049;
    s.phase.kind = "builtin";
    s.flow.max_steps = 40;
    return s;
  }
  if (name == "rectangular_signal") {
    s.study.kind = "signal_ladder";
    s.study.periods = {1, 2, 3, 5};
    s.study.nodes = 8001;
    s.geometry.shape = "rectangular_signal";
    s.geometry.periods = 2;
    s.geometry.signal_c = 0.1;
    s.geometry.tilt = 0.25;
    s.geometry.nodes = 2049;
    s.variants = {Variant::Fhat_eps};
    s.flow.eps = s.geometry.signal_c / s.geometry.periods;
    s.flow.max_steps = 40;
    return s;
  }
  fail(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

Scenario load_scenario(const std::string& path_or_name) {
  const fs::path p(path_or_name);
  if (fs::is_regular_file(p)) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    auto s = scenario_from_json(ss.str());
    if (s.name.empty()) s.name = p.stem().string();
    if (!s.geometry.file.empty() && fs::path(s.geometry.file).is_relative())
      s.geometry.file = (p.parent_path() / s.geometry.file).string();
    return s;
  }
  return builtin_scenario(path_or_name);
}

LimitMembrane builtin_membrane(const std::string& name, double jump) {
  if (name == "sphere_with_interface") return shapes::sphere_with_interface(1.0, 2049);
  if (name == "kinked_spheres") return shapes::kinked_spheres(jump, 2049);
  fail(ErrorCode::UnknownScenario, "unknown limit membrane '" + name + "'");
}

InitialData initial_data(const Scenario& s) {
  const auto& g = s.geometry;
  const double eps = s.flow.eps;
  InitialData d;
  bool has_builtin_phase = true;
  if (g.shape == "capped_cylinder") {
    d.curve = shapes::capped_cylinder(g.nodes);
    d.phase = shapes::capped_cylinder_phase(d.curve);
  } else if (g.shape == "sphere") {
    d.curve = shapes::sphere(g.nodes, g.radius);
    d.phase.resize(d.curve.size());
    for (std::size_t i = 0; i < d.curve.size(); ++i) d.phase[i] = std::tanh(d.curve.x[i] / eps);
  } else if (g.shape == "dumbbell") {
    const double h = g.diameter > 0.0 ? g.diameter : eps / g.length;
    auto db = shapes::dumbbell(g.nodes, g.length, h, eps, g.radius);
    d.curve = std::move(db.curve);
    d.phase = std::move(db.phase);
  } else if (g.shape == "rectangular_signal") {
    auto rs = shapes::rectangular_signal(g.nodes, g.periods, g.signal_c, g.tilt);
    d.curve = std::move(rs.curve);
    d.phase = std::move(rs.phase);
  } else if (g.shape == "recovery") {
    const double e = s.study.eps.empty() ? eps : s.study.eps.front();
    RecoveryOptions o;
    if (g.nodes > 0) o.nodes = g.nodes;
    auto r = build_recovery(builtin_membrane(s.study.membrane, s.study.jump), e, make_model(s.material), o);
    d.curve = std::move(r.curve);
    d.phase = std::move(r.phase);
  } else if (g.shape == "file") {
    const auto t = read_csv(g.file);
    const auto *x = t.column("x"), *y = t.column("y"), *u = t.column("u");
    if (!x || !y) fail(ErrorCode::Io, g.file + " needs columns x and y");
    d.curve = curve_from_columns(*x, *y);
    if (g.nodes > 0 && g.nodes != d.curve.size()) {
      auto rs = reparametrize_with_field(d.curve, u ? *u : std::vector<double>(x->size(), s.phase.value), g.nodes);
      d.curve = std::move(rs.curve);
      d.phase = std::move(rs.field);
    } else {
      d.phase = u ? *u : std::vector<double>(x->size(), s.phase.value);
    }
    has_builtin_phase = u != nullptr;
  } else {
    fail(ErrorCode::UnknownScenario, "unknown geometry '" + g.shape + "'");
  }
  if (s.phase.kind == "constant") {
    std::fill(d.phase.begin(), d.phase.end(), s.phase.value);
  } else if (s.phase.kind == "builtin" || s.phase.kind == "file") {
    if (s.phase.kind == "file" && (g.shape != "file" || !has_builtin_phase))
      fail(ErrorCode::InvalidArgument, "phase kind 'file' needs a geometry file with a u column");
  } else {
    fail(ErrorCode::InvalidArgument, "unknown phase kind '" + s.phase.kind + "'");
  }
  add_noise(d.curve, g.noise, g.seed);
  return d;
}

fs::path output_root() {
  const char* env = std::getenv("MEMBRANE_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

// ---------------------------------------------------------------- metrics

std::optional<double> min_neck(const Curve& c) {
  std::optional<double> best;
  const std::size_t n = c.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(c.y[i] < c.y[i - 1] && c.y[i] <= c.y[i + 1])) continue;
    if (!best || c.y[i] < *best) best = c.y[i];
  }
  return best;
}

WindowJump max_window_jump(const Curve& c, double width) {
  const auto s = arclength(c);
  const auto phi = angle_function(c).phi;
  WindowJump w;
  std::size_t b = 0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    b = std::max(b, a);
    while (b + 1 < c.size() && s[b + 1] - s[a] <= width) ++b;
    for (std::size_t k = a + 1; k <= b; ++k) {
      const double j = std::abs(phi[k] - phi[a]);
      if (j > w.jump) w = {j, phi[a], phi[k], s[a]};
    }
  }
  return w;
}

Shape shape_metrics(const Curve& c, double window) {
  Shape sh;
  sh.min_neck = min_neck(c);
  sh.max_phi_prime = max_angle_derivative(c);
  const auto w = max_window_jump(c, window);
  sh.max_jump = w.jump;
  sh.jump_from = w.from;
  sh.jump_to = w.to;
  sh.jump_at = w.start;
  return sh;
}

// ---------------------------------------------------------------- studies

std::vector<LadderRow> gamma_ladder(const Scenario& s, const std::vector<double>& eps) {
  if (eps.empty()) fail(ErrorCode::InvalidArgument, "ladder needs at least one eps");
  const auto m = make_model(s.material);
  const auto mem = builtin_membrane(s.study.membrane, s.study.jump);
  RecoveryOptions o;
  o.spacing = *std::min_element(eps.begin(), eps.end()) / 40.0;
  if (!s.variants.empty()) o.variant = s.variants.front();
  std::vector<LadderRow> rows(eps.size());
  run_pool(eps.size(), s.output.workers, [&](std::size_t i) {
    const auto r = build_recovery(mem, eps[i], m, o);
    rows[i].eps = eps[i];
    rows[i].recovery_energy = r.report.energy.total;
    rows[i].limit_energy = r.report.limit.total;
    rows[i].gap = std::abs(r.report.gap);
    rows[i].rel_gap = rows[i].gap / std::abs(r.report.limit.total);
  });
  for (std::size_t i = 1; i < rows.size(); ++i)
    rows[i].order = std::log(rows[i - 1].gap / rows[i].gap) / std::log(rows[i - 1].eps / rows[i].eps);
  return rows;
}

std::vector<DumbbellRow> dumbbell_scaling(const Scenario& s) {
  if (s.study.lengths.empty()) fail(ErrorCode::InvalidArgument, "dumbbell study needs lengths");
  const auto m = make_model(s.material);
  const double eps = s.flow.eps;
  const std::size_t nodes = s.study.nodes ? s.study.nodes : 40001;
  std::vector<DumbbellRow> rows(s.study.lengths.size());
  run_pool(rows.size(), s.output.workers, [&](std::size_t i) {
    const double l = s.study.lengths[i], h = eps / l;
    const auto db = shapes::dumbbell(nodes, l, h, eps, s.geometry.radius);
    EnergyOptions eo;
    eo.variant = Variant::F_eps;
    eo.eps = eps;
    eo.bending_exponent = s.flow.bending_exponent;
    const auto e = total_energy(db.curve, db.phase, m, eo);
    rows[i] = {l, h, eps, e.total, e.interface_bending, e.total - e.interface_bending};
  });
  return rows;
}

std::vector<SignalRow> signal_ladder(const Scenario& s) {
  if (s.study.periods.empty()) fail(ErrorCode::InvalidArgument, "signal study needs periods");
  const auto m = make_model(s.material);
  const std::size_t nodes = s.study.nodes ? s.study.nodes : 8001;
  std::vector<SignalRow> rows(s.study.periods.size());
  run_pool(rows.size(), s.output.workers, [&](std::size_t i) {
    const auto rs = shapes::rectangular_signal(nodes, s.study.periods[i], s.geometry.signal_c);
    double L = 0.0;
    for (std::size_t c = rs.window_first; c < rs.window_last; ++c) L += rs.curve.chord(c);
    EnergyOptions eo;
    eo.eps = rs.eps;
    eo.bending_exponent = s.flow.bending_exponent;
    eo.variant = Variant::F_eps;
    const double F = total_energy(rs.curve, rs.phase, m, eo).total;
    eo.variant = Variant::Fhat_eps;
    const double Fhat = total_energy(rs.curve, rs.phase, m, eo).total;
    rows[i] = {s.study.periods[i], rs.eps, rs.window_length, L, F, Fhat};
  });
  return rows;
}

// ---------------------------------------------------------------- run

RunSummary run_scenario(const Scenario& s, const fs::path& root) {
  RunSummary out;
  out.scenario = s.name;
  out.dir = root / (s.output.dir.empty() ? s.name : s.output.dir);
  fs::create_directories(out.dir);
  {
    auto f = open_out(out.dir / "scenario.json");
    f << to_json(s) << '\n';
  }
  const auto m = make_model(s.material);
  json summary{{"scenario", s.name}, {"study", s.study.kind}};

  if (s.study.kind == "gamma_ladder") {
    out.ladder = gamma_ladder(s, s.study.eps);
    auto f = open_out(out.dir / "ladder.csv");
    f << "eps,F_recovery,F_limit,gap,rel_gap,order\n";
    Series gap{"|F_eps - F|", {}, {}};
    for (const auto& r : out.ladder) {
      f << num(r.eps) << ',' << num(r.recovery_energy) << ',' << num(r.limit_energy) << ',' << num(r.gap) << ','
        << num(r.rel_gap) << ',' << num(r.order) << '\n';
      gap.x.push_back(r.eps);
      gap.y.push_back(r.gap);
    }
    if (s.output.plots) write_svg(out.dir / "ladder.svg", "Recovery energy gap", "eps", "gap", {gap}, false, true);
    summary["final_rel_gap"] = out.ladder.back().rel_gap;
    summary["last_order"] = out.ladder.back().order;
  } else if (s.study.kind == "dumbbell_scaling") {
    out.dumbbell = dumbbell_scaling(s);
    auto f = open_out(out.dir / "dumbbell.csv");
    f << "l,h,eps,total,bending_term,rest\n";
    for (const auto& r : out.dumbbell)
      f << num(r.l) << ',' << num(r.h) << ',' << num(r.eps) << ',' << num(r.total) << ',' << num(r.bending_term)
        << ',' << num(r.rest) << '\n';
  } else if (s.study.kind == "signal_ladder") {
    out.signal = signal_ladder(s);
    auto f = open_out(out.dir / "signal.csv");
    f << "k,eps,window_length,smooth_window_length,F,Fhat\n";
    for (const auto& r : out.signal)
      f << r.k << ',' << num(r.eps) << ',' << num(r.window_length) << ',' << num(r.smooth_window_length) << ','
        << num(r.F) << ',' << num(r.Fhat) << '\n';
  } else if (s.study.kind != "flow") {
    fail(ErrorCode::InvalidArgument, "unknown study '" + s.study.kind + "'");
  }

  if (s.flow.max_steps > 0 && !s.variants.empty()) {
    const auto init = initial_data(s);
    out.runs.resize(s.variants.size());
    run_pool(s.variants.size(), s.output.workers, [&](std::size_t i) {
      FlowConfig cfg = s.flow;
      cfg.variant = s.variants[i];
      auto& run = out.runs[i];
      run.variant = cfg.variant;
      run.dir = out.dir / label(cfg.variant);
      fs::create_directories(run.dir);
      const auto t0 = std::chrono::steady_clock::now();
      run.result = evolve_to_stationary(make_flow_state(init.curve, init.phase, m, cfg), m, cfg);
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const auto& st = run.result.state;
      write_trajectory(run.dir / "trajectory.csv", run.result.trajectory);
      write_state(run.dir / "final_state.csv", st.curve, st.phase);
      const auto sh = shape_metrics(st.curve, 4.0 * cfg.eps);
      json js{{"scenario", s.name},
              {"variant", label(cfg.variant)},
              {"eps", cfg.eps},
              {"nodes", st.curve.size()},
              {"status", to_string(run.result.status)},
              {"steps", st.step_count},
              {"rejected", run.result.rejected},
              {"time", st.time},
              {"energy", breakdown_json(st.energy)},
              {"final_grad_norm", run.result.final_grad_norm},
              {"max_constraint_drift", run.result.max_constraint_drift},
              {"max_steps_exceeded", run.result.max_steps_exceeded},
              {"min_neck", sh.min_neck ? json(*sh.min_neck) : json(nullptr)},
              {"max_phi_prime", sh.max_phi_prime},
              {"max_jump_4eps", sh.max_jump},
              {"jump_from", sh.jump_from},
              {"jump_to", sh.jump_to}};
      auto f = open_out(run.dir / "summary.json");
      f << js.dump(2) << '\n';
      if (s.output.plots) write_state_plots(run.dir, label(cfg.variant), st.curve, st.phase);
    });
    if (s.output.plots && out.runs.size() > 1) {
      std::vector<Series> angles;
      for (const auto& r : out.runs)
        angles.push_back({label(r.variant), arclength(r.result.state.curve), angle_function(r.result.state.curve).phi});
      write_svg(out.dir / "angles.svg", "Angle of the stationary shapes", "arclength", "phi", angles);
    }
    json runs = json::array();
    for (const auto& r : out.runs)
      runs.push_back({{"variant", label(r.variant)},
                      {"dir", fs::relative(r.dir, out.dir).generic_string()},
                      {"status", to_string(r.result.status)},
                      {"energy", r.result.state.energy.total}});
    summary["runs"] = runs;
  }
  auto f = open_out(out.dir / "summary.json");
  f << summary.dump(2) << '\n';
  return out;
}

// ---------------------------------------------------------------- compare

CompareReport compare_runs(const std::vector<fs::path>& dirs, const fs::path& out) {
  if (dirs.size() < 2) fail(ErrorCode::InvalidArgument, "compare needs at least two runs");
  CompareReport rep;
  for (const auto& d : dirs) {
    if (!fs::is_regular_file(d / "final_state.csv") || !fs::is_regular_file(d / "summary.json"))
      fail(ErrorCode::Io, d.string() + " is not a completed flow run");
    const auto t = read_csv(d / "final_state.csv");
    const auto *x = t.column("x"), *y = t.column("y");
    if (!x || !y) fail(ErrorCode::Io, d.string() + "/final_state.csv lacks x or y");
    std::ifstream jf(d / "summary.json");
    json js;
    try {
      js = json::parse(jf);
    } catch (const json::exception& e) {
      fail(ErrorCode::Io, d.string() + "/summary.json: " + e.what());
    }
    CompareRow row;
    row.run = d.string();
    row.variant = js.value("variant", "");
    row.eps = js.value("eps", 0.05);
    row.energy = js.at("energy").value("total", 0.0);
    const Curve c = curve_from_columns(*x, *y);
    row.nodes = c.size();
    const auto sh = shape_metrics(c, 4.0 * row.eps);
    row.min_neck = sh.min_neck;
    row.max_phi_prime = sh.max_phi_prime;
    row.max_jump = sh.max_jump;
    rep.rows.push_back(row);
  }
  for (const auto& r : rep.rows)
    if (r.nodes != rep.rows.front().nodes)
      fail(ErrorCode::IncompatibleGrids, "runs have " + std::to_string(rep.rows.front().nodes) + " and " +
                                             std::to_string(r.nodes) + " nodes");
  const auto& ref = rep.rows.front();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& r : rep.rows) {
    r.d_energy = r.energy - ref.energy;
    r.d_neck = r.min_neck && ref.min_neck ? *r.min_neck - *ref.min_neck : (!r.min_neck && !ref.min_neck ? 0.0 : nan);
    r.d_phi_prime = r.max_phi_prime - ref.max_phi_prime;
  }

  const auto neck = [](const std::optional<double>& v) { return v ? num(*v) : std::string("none"); };
  std::ostringstream md;
  md << "| run | variant | nodes | energy | min neck | max phi' | max jump (4 eps) | d energy | d neck | d phi' |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "| %s | %s | %zu | %.8g | %s | %.6g | %.6g | %.3g | %.3g | %.3g |\n", r.run.c_str(),
                  r.variant.c_str(), r.nodes, r.energy, r.min_neck ? fmt_tick(*r.min_neck).c_str() : "none",
                  r.max_phi_prime, r.max_jump, r.d_energy, r.d_neck, r.d_phi_prime);
    md << buf;
  }
  rep.markdown = md.str();
  if (!out.empty()) {
    fs::create_directories(out);
    auto f = open_out(out / "compare.md");
    f << rep.markdown;
    auto c = open_out(out / "compare.csv");
    c << "run,variant,nodes,eps,energy,min_neck,max_phi_prime,max_jump_4eps,d_energy,d_neck,d_phi_prime\n";
    for (const auto& r : rep.rows)
      c << r.run << ',' << r.variant << ',' << r.nodes << ',' << num(r.eps) << ',' << num(r.energy) << ','
        << neck(r.min_neck) << ',' << num(r.max_phi_prime) << ',' << num(r.max_jump) << ',' << num(r.d_energy) << ','
        << num(r.d_neck) << ',' << num(r.d_phi_prime) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------- validate

std::vector<Check> validate_invariants() {
  std::vector<Check> out;
  const auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };
  const auto run = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, e.what());
    }
  };
  char buf[256];

  run("material_constants", [&] {
    const auto sc = sigma_constants(DoubleWell::quartic());
    const double err = std::max(std::abs(sc.sigma - 8.0 / 3.0), std::abs(sc.sigma_hat - 2.0));
    std::snprintf(buf, sizeof buf, "sigma %.12g sigma_hat %.12g", sc.sigma, sc.sigma_hat);
    add("material_constants", err < 1e-8, buf);
  });

  run("gradient_consistency", [&] {
    const auto m = make_default_model();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      for (Variant v : {Variant::F_eps, Variant::E_eps, Variant::Fhat_eps}) {
        auto st = shapes::random_closed(64, seed);
        EnergyOptions eo;
        eo.variant = v;
        eo.eps = 0.1;
        const auto g = discrete_gradient(st.curve, st.phase, m, eo);
        const auto w = phase_metric_weights(st.curve);
        const auto energy = [&] { return total_energy(st.curve, st.phase, m, eo).total; };
        std::vector<double> an, fd;
        const auto probe = [&](std::vector<double>& vals, std::size_t i, double analytic) {
          const double keep = vals[i];
          vals[i] = keep + 1e-6;
          const double fp = energy();
          vals[i] = keep - 1e-6;
          const double fm = energy();
          vals[i] = keep;
          an.push_back(analytic);
          fd.push_back((fp - fm) / 2e-6);
        };
        for (std::size_t i = 0; i < st.curve.size(); ++i) {
          probe(st.curve.x, i, g.dx[i]);
          if (i > 0 && i + 1 < st.curve.size()) probe(st.curve.y, i, g.dy[i]);
          probe(st.phase, i, g.du[i] * w[i]);
        }
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < an.size(); ++i) {
          scale = std::max(scale, std::abs(fd[i]));
          err = std::max(err, std::abs(an[i] - fd[i]));
        }
        worst = std::max(worst, err / scale);
      }
    }
    std::snprintf(buf, sizeof buf, "max relative error %.3g", worst);
    add("gradient_consistency", worst < 1e-5, buf);
  });

  run("sphere_stationary", [&] {
    auto m = make_default_model();
    m.Hs = ScalarLaw::constant(2.0);
    const auto c = shapes::sphere(512);
    EnergyOptions eo;
    eo.variant = Variant::E_eps;
    const auto g = discrete_gradient(c, PhaseField(c.size(), 1.0), m, eo);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::hypot(g.dx[i], g.dy[i]));
    std::snprintf(buf, sizeof buf, "max node gradient %.3g", worst);
    add("sphere_stationary", worst < 1e-3, buf);
  });

  run("reparametrization_invariance", [&] {
    const auto m = make_default_model();
    const std::size_t n = 401;
    std::vector<double> x(n), y(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double sgm = static_cast<double>(i) / static_cast<double>(n - 1);
      const double t = kPi * (sgm - 0.08 * std::sin(2.0 * kPi * sgm) / (2.0 * kPi));
      x[i] = -std::cos(t);
      y[i] = std::sin(t);
      u[i] = std::tanh(x[i] / 0.2);
    }
    y.front() = y.back() = 0.0;
    GeometryOptions go;
    go.speed_tol = 1.0;
    const Curve c = build_curve(x, y, kPi, go);
    const auto r = reparametrize_with_field(c, u, n);
    const auto a = total_energy(c, u, m, 0.2, Variant::F_eps);
    const auto b = total_energy(r.curve, r.field, m, 0.2, Variant::F_eps);
    const double rel = std::max({std::abs(a.total - b.total) / std::abs(b.total),
                                 std::abs(a.area - b.area) / b.area, std::abs(a.volume - b.volume) / b.volume});
    std::snprintf(buf, sizeof buf, "max relative change %.3g", rel);
    add("reparametrization_invariance", rel < 1e-3, buf);
  });

  run("lyapunov_and_conservation", [&] {
    const auto m = make_default_model();
    FlowConfig cfg;
    cfg.variant = Variant::E_eps;
    cfg.max_steps = 100;
    const auto c = shapes::capped_cylinder(129);
    const auto res = evolve_to_stationary(make_flow_state(c, shapes::capped_cylinder_phase(c), m, cfg), m, cfg);
    bool mono = true;
    for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
      const double prev = res.trajectory[k - 1].energy.total;
      mono = mono && res.trajectory[k].energy.total <= prev + 1e-12 * std::abs(prev);
    }
    std::snprintf(buf, sizeof buf, "%zu steps, drift %.3g", res.state.step_count, res.max_constraint_drift);
    add("lyapunov_and_conservation", mono && res.max_constraint_drift <= 1e-6, buf);
  });

  run("scenario_roundtrip", [&] {
    bool ok = true;
    for (const auto& name : builtin_scenario_names()) {
      const auto s = builtin_scenario(name);
      ok = ok && scenario_from_json(to_json(s)) == s;
    }
    add("scenario_roundtrip", ok, ok ? "all builtins" : "mismatch");
  });
  return out;
}

}  // namespace membrane::harness
