#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "membrane/energy.hpp"
#include "membrane/flow.hpp"
#include "membrane/limit.hpp"
#include "membrane/materials.hpp"

namespace membrane::harness {

struct GeometryConfig {
  // capped_cylinder | sphere | dumbbell | rectangular_signal | recovery | file
  std::string shape = "capped_cylinder";
  std::size_t nodes = 256;
  double radius = 1.0;
  double length = 2.0;    // dumbbell cylinder length l
  double diameter = 0.0;  // dumbbell h; 0 picks eps / l
  int periods = 3;        // rectangular_signal k
  double signal_c = 0.1;
  double tilt = 0.0;      // slant of the signal edges
  std::string file;       // CSV with columns x,y and optionally u
  double noise = 0.0;     // relative radial noise on interior heights
  std::uint64_t seed = 0;

  bool operator==(const GeometryConfig&) const = default;
};

struct PhaseConfig {
  std::string kind = "builtin";  // builtin | constant | file
  double value = 1.0;

  bool operator==(const PhaseConfig&) const = default;
};

// A law is either constant or a smooth quintic between its values at -1 and +1.
struct LawConfig {
  double minus = 1.0;
  double plus = 1.0;

  bool operator==(const LawConfig&) const = default;
};

struct MaterialConfig {
  std::string well = "quartic";  // quartic | table
  double well_scale = 1.0;
  std::vector<double> table_u, table_w;
  LawConfig k{1.0, 1.0};
  LawConfig kG{-1.0, -1.0};
  LawConfig Hs{1.0, 2.0};
  double C0 = 10.0;

  bool operator==(const MaterialConfig&) const = default;
};

MaterialModel make_model(const MaterialConfig& cfg);

// Parameter sweeps that do not evolve a flow.
struct StudyConfig {
  std::string kind = "flow";  // flow | gamma_ladder | dumbbell_scaling | signal_ladder
  std::vector<double> eps;
  std::string membrane = "sphere_with_interface";  // or kinked_spheres
  double jump = 1.0;
  std::vector<double> lengths;
  std::vector<int> periods;
  std::size_t nodes = 0;  // resolution of the sweep states; 0 keeps the defaults

  bool operator==(const StudyConfig&) const = default;
};

struct OutputConfig {
  std::string dir;  // relative to the output root; empty uses the scenario name
  bool plots = true;
  std::size_t workers = 0;  // 0 uses the hardware concurrency

  bool operator==(const OutputConfig&) const = default;
};

struct Scenario {
  std::string name;
  GeometryConfig geometry;
  PhaseConfig phase;
  MaterialConfig material;
  FlowConfig flow;
  std::vector<Variant> variants{Variant::F_eps};
  StudyConfig study;
  OutputConfig output;

  bool operator==(const Scenario&) const = default;
};

std::string to_json(const Scenario& s, int indent = 2);
Scenario scenario_from_json(const std::string& text);

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);
// A path to an existing file is parsed; anything else is looked up as a builtin.
Scenario load_scenario(const std::string& path_or_name);

struct InitialData {
  Curve curve;
  PhaseField phase;
};

// Resolves the geometry and phase sections, including file input and noise.
InitialData initial_data(const Scenario& s);

// Builtin limit membranes used by the recovery studies.
LimitMembrane builtin_membrane(const std::string& name, double jump);

// Environment variable MEMBRANE_OUTPUT_ROOT, or "runs" when unset.
std::filesystem::path output_root();

struct Shape {
  std::optional<double> min_neck;  // smallest interior local minimum of y
  double max_phi_prime = 0.0;
  double max_jump = 0.0;            // largest |delta phi| over windows of the given width
  double jump_from = 0.0, jump_to = 0.0;
  double jump_at = 0.0;             // arclength of the window start
};

Shape shape_metrics(const Curve& c, double window);

// Largest |phi(b) - phi(a)| over arclength windows b - a <= width; reports the pair.
struct WindowJump {
  double jump = 0.0;
  double from = 0.0, to = 0.0;
  double start = 0.0;
};
WindowJump max_window_jump(const Curve& c, double width);

std::optional<double> min_neck(const Curve& c);

struct FlowRun {
  Variant variant = Variant::F_eps;
  FlowResult result;
  std::filesystem::path dir;
  double seconds = 0.0;
};

struct LadderRow {
  double eps = 0.0;
  double recovery_energy = 0.0;
  double limit_energy = 0.0;
  double gap = 0.0;
  double rel_gap = 0.0;
  double order = 0.0;  // against the previous row; 0 on the first
};

struct DumbbellRow {
  double l = 0.0, h = 0.0, eps = 0.0;
  double total = 0.0;
  double bending_term = 0.0;
  double rest = 0.0;
};

struct SignalRow {
  int k = 0;
  double eps = 0.0;
  double window_length = 0.0;
  double smooth_window_length = 0.0;
  double F = 0.0, Fhat = 0.0;
};

struct RunSummary {
  std::string scenario;
  std::filesystem::path dir;
  std::vector<FlowRun> runs;
  std::vector<LadderRow> ladder;
  std::vector<DumbbellRow> dumbbell;
  std::vector<SignalRow> signal;
};

// Writes every artifact below output_root() / dir. Flow runs of different
// variants go to one subdirectory each and run in a worker pool.
RunSummary run_scenario(const Scenario& s, const std::filesystem::path& root = output_root());

std::vector<LadderRow> gamma_ladder(const Scenario& s, const std::vector<double>& eps);
std::vector<DumbbellRow> dumbbell_scaling(const Scenario& s);
std::vector<SignalRow> signal_ladder(const Scenario& s);

struct CompareRow {
  std::string run;
  std::string variant;
  std::size_t nodes = 0;
  double eps = 0.0;
  double energy = 0.0;
  std::optional<double> min_neck;
  double max_phi_prime = 0.0;
  double max_jump = 0.0;  // over windows of 4 eps
  double d_energy = 0.0, d_neck = 0.0, d_phi_prime = 0.0;  // against the first run
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::string markdown;
};

// Reads final_state.csv and summary.json of each run directory; writes
// compare.md and compare.csv to out when it is non-empty.
CompareReport compare_runs(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out = {});

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fast invariant suite behind the validate command.
std::vector<Check> validate_invariants();

}  // namespace membrane::harness
