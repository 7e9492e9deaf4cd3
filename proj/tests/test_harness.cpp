#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "membrane/errors.hpp"
#include "membrane/harness.hpp"
#include "membrane/shapes.hpp"

using namespace membrane;
using namespace membrane::harness;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("membrane_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Scenario tiny_flow(const std::string& name) {
  auto s = builtin_scenario("paper_fig_kink");
  s.name = name;
  s.geometry.nodes = 65;
  s.flow.max_steps = 8;
  s.output.plots = true;
  s.output.workers = 2;
  return s;
}

}  // namespace

TEST(InitialData, CappedCylinderAreaAndPhase) {
  const auto d = initial_data(builtin_scenario("paper_fig_kink"));
  EXPECT_EQ(d.curve.size(), 1024u);
  EXPECT_NEAR(measures(d.curve).area, 4 * kPi, 1e-3);
  EXPECT_DOUBLE_EQ(d.phase.front(), -1.0);
  EXPECT_DOUBLE_EQ(d.phase.back(), 1.0);
  // The ramp 4x/3 + 2/3 vanishes at x = -1/2.
  const Curve probe = build_curve({-2.0, -0.5, 2.0}, {0.0, 0.5, 0.0}, 4.5, GeometryOptions{0.0, 1.0, kPi});
  const auto u = shapes::capped_cylinder_phase(probe);
  EXPECT_DOUBLE_EQ(u[0], -1.0);
  EXPECT_NEAR(u[1], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(u[2], 1.0);
}

TEST(InitialData, RectangularSignalWindowLength) {
  const auto s = shapes::rectangular_signal(8001, 3, 0.1);
  EXPECT_DOUBLE_EQ(s.window_length, 2.0 + 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.eps, 0.1 / 3.0);
  double L = 0.0;
  for (std::size_t c = s.window_first; c < s.window_last; ++c) L += s.curve.chord(c);
  // Rounding 4k corners of radius r shortens the signal by r (2 - pi/2) each.
  const double rounded = s.window_length - 12.0 * s.corner_radius * (2.0 - kPi / 2.0);
  EXPECT_NEAR(L, rounded, 2.0 * s.corner_radius);
  for (double u : std::vector<double>(s.phase.begin() + s.window_first, s.phase.begin() + s.window_last + 1))
    EXPECT_EQ(u, 0.0);
}

TEST(InitialData, DumbbellNeckIsHalfTheDiameter) {
  const auto d = shapes::dumbbell(20001, 2.0, 0.025, 0.05);
  ASSERT_TRUE(min_neck(d.curve).has_value());
  EXPECT_NEAR(*min_neck(d.curve), 0.0125, 1e-6);
  EXPECT_EQ(d.phase[d.curve.size() / 2], 0.0);
}

TEST(InitialData, FileGeometryWithPhase) {
  const auto dir = scratch("file");
  const auto c = shapes::sphere(101);
  {
    std::ofstream f(dir / "shape.csv");
    f << "x,y,u\n";
    for (std::size_t i = 0; i < c.size(); ++i) f << c.x[i] << ',' << c.y[i] << ',' << std::tanh(c.x[i] / 0.1) << '\n';
  }
  {
    std::ofstream f(dir / "scenario.json");
    f << R"({"name": "from_file", "geometry": {"shape": "file", "file": "shape.csv", "nodes": 0}, "phase": {"kind": "file"}})";
  }
  const auto s = load_scenario((dir / "scenario.json").string());
  EXPECT_EQ(s.name, "from_file");
  const auto d = initial_data(s);
  EXPECT_EQ(d.curve.size(), 101u);
  EXPECT_NEAR(measures(d.curve).area, 4 * kPi, 1e-2);
  EXPECT_NEAR(d.phase.back(), 1.0, 1e-6);
}

TEST(Scenarios, UnknownNameIsReported) {
  try {
    builtin_scenario("no_such_thing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownScenario);
  }
}

TEST(Scenarios, RoundTripIsExact) {
  for (const auto& name : builtin_scenario_names()) {
    const auto s = builtin_scenario(name);
    EXPECT_EQ(scenario_from_json(to_json(s)), s) << name;
  }
  auto s = builtin_scenario("dumbbell");
  s.material.Hs = {0.3, -1.7};
  s.material.well = "table";
  s.material.table_u = {-1.0, 0.0, 1.0};
  s.material.table_w = {0.0, 1.0, 0.0};
  s.flow.curve_metric = CurveMetric::Surface;
  s.flow.dt_init = 1.0 / 3.0;
  s.geometry.seed = 123456789012345ull;
  s.variants = {Variant::Fhat_eps, Variant::E_eps};
  EXPECT_EQ(scenario_from_json(to_json(s)), s);
}

TEST(Scenarios, PartialConfigKeepsDefaults) {
  const auto s = scenario_from_json(R"({"flow": {"eps": 0.1}, "variants": ["E"]})");
  EXPECT_EQ(s.flow.eps, 0.1);
  EXPECT_EQ(s.flow.max_steps, FlowConfig{}.max_steps);
  EXPECT_EQ(s.geometry.shape, "capped_cylinder");
  ASSERT_EQ(s.variants.size(), 1u);
  EXPECT_EQ(s.variants[0], Variant::E_eps);
}

TEST(Scenarios, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(scenario_from_json(R"({"flow": {"epsilon": 0.1}})"), Error);
  EXPECT_THROW(scenario_from_json(R"({"geometry": {"nodes": "many"}})"), Error);
  EXPECT_THROW(scenario_from_json(R"({"flow": {"dt_min": 1, "dt_init": 0.1}})"), Error);
  EXPECT_THROW(scenario_from_json("{not json"), Error);
}

TEST(Metrics, SphereHasNoNeckAndUnitSlope) {
  const auto c = shapes::sphere(1025);
  EXPECT_FALSE(min_neck(c).has_value());
  const auto w = max_window_jump(c, 0.2);
  EXPECT_NEAR(w.jump, 0.2, 5e-3);
  EXPECT_NEAR(max_angle_derivative(c), 1.0, 1e-2);
}

TEST(Metrics, SharpCornerShowsUpAsJump) {
  const auto s = shapes::rectangular_signal(8001, 1, 0.1);
  const auto w = max_window_jump(s.curve, 2.0 * s.corner_radius);
  EXPECT_NEAR(w.jump, kPi / 2.0, 0.05);
}

TEST(OutputRoot, ReadsEnvironment) {
  setenv("MEMBRANE_OUTPUT_ROOT", "/tmp/some_root", 1);
  EXPECT_EQ(output_root(), fs::path("/tmp/some_root"));
  unsetenv("MEMBRANE_OUTPUT_ROOT");
  EXPECT_EQ(output_root(), fs::path("runs"));
}

TEST(RunScenario, WritesArtifactsAndRerunsBitIdentically) {
  const auto root = scratch("rerun");
  const auto a = run_scenario(tiny_flow("a"), root);
  const auto b = run_scenario(tiny_flow("b"), root);
  ASSERT_EQ(a.runs.size(), 2u);
  for (const char* v : {"E_eps", "F_eps"}) {
    for (const char* file : {"trajectory.csv", "final_state.csv", "summary.json", "cross_section.svg", "angle.svg",
                             "phase.svg"})
      EXPECT_TRUE(fs::is_regular_file(a.dir / v / file)) << v << '/' << file;
    EXPECT_EQ(slurp(a.dir / v / "trajectory.csv"), slurp(b.dir / v / "trajectory.csv"));
    EXPECT_EQ(slurp(a.dir / v / "final_state.csv"), slurp(b.dir / v / "final_state.csv"));
  }
  EXPECT_TRUE(fs::is_regular_file(a.dir / "angles.svg"));
  EXPECT_TRUE(fs::is_regular_file(a.dir / "scenario.json"));
  EXPECT_EQ(scenario_from_json(slurp(a.dir / "scenario.json")), tiny_flow("a"));
  const auto header = slurp(a.dir / "E_eps" / "trajectory.csv").substr(0, 160);
  EXPECT_EQ(header.rfind("step,time,dt,total,helfrich,interface_gradient,interface_well,interface_bending,area,"
                         "phase_integral,volume,grad_norm",
                         0),
            0u);
}

TEST(CompareRuns, IdenticalRunsHaveZeroDiffs) {
  const auto root = scratch("compare");
  const auto a = run_scenario(tiny_flow("a"), root);
  const auto b = run_scenario(tiny_flow("b"), root);
  const auto rep = compare_runs({a.dir / "F_eps", b.dir / "F_eps"}, root / "report");
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[1].d_energy, 0.0);
  EXPECT_EQ(rep.rows[1].d_phi_prime, 0.0);
  EXPECT_TRUE(rep.rows[1].d_neck == 0.0);
  EXPECT_TRUE(fs::is_regular_file(root / "report" / "compare.md"));
  EXPECT_TRUE(fs::is_regular_file(root / "report" / "compare.csv"));
}

TEST(CompareRuns, DifferentGridsAreIncompatible) {
  const auto root = scratch("grids");
  auto s = tiny_flow("a");
  s.variants = {Variant::E_eps};
  const auto a = run_scenario(s, root);
  s.name = "b";
  s.geometry.nodes = 81;
  const auto b = run_scenario(s, root);
  try {
    compare_runs({a.dir / "E_eps", b.dir / "E_eps"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleGrids);
  }
  EXPECT_THROW(compare_runs({a.dir / "E_eps"}), Error);
}

TEST(Studies, DumbbellBendingTermGrowsWithLength) {
  auto s = builtin_scenario("dumbbell");
  s.study.nodes = 20001;
  const auto rows = dumbbell_scaling(s);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].bending_term / rows[i - 1].bending_term, 1.8);
    EXPECT_NEAR(rows[i].rest, rows[0].rest, 0.2 * std::abs(rows[0].rest));
    EXPECT_NEAR(rows[i].l * rows[i].h, rows[i].eps, 1e-15);
  }
}

TEST(Studies, GammaLadderGapShrinks) {
  auto s = builtin_scenario("gamma_ladder");
  const auto rows = gamma_ladder(s, {0.1, 0.05});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[1].gap, rows[0].gap);
  EXPECT_NEAR(rows[1].order, 1.0, 0.2);
}

TEST(Validate, InvariantSuitePasses) {
  for (const auto& c : validate_invariants()) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}
