#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "membrane/errors.hpp"
#include "membrane/harness.hpp"

namespace fs = std::filesystem;
using namespace membrane;
using namespace membrane::harness;

namespace {

void print_runs(const RunSummary& r) {
  for (const auto& run : r.runs) {
    const auto& st = run.result.state;
    std::printf("%-9s %-10s steps %-6zu energy %.10g  grad %.3g  drift %.3g  %.1f s  -> %s\n", to_string(run.variant),
                to_string(run.result.status), st.step_count, st.energy.total, run.result.final_grad_norm,
                run.result.max_constraint_drift, run.seconds, run.dir.string().c_str());
  }
  for (const auto& l : r.ladder)
    std::printf("eps %-8g F_eps %.8g  F %.8g  gap %.4g (%.3g%%)  order %.3f\n", l.eps, l.recovery_energy,
                l.limit_energy, l.gap, 100.0 * l.rel_gap, l.order);
  for (const auto& d : r.dumbbell)
    std::printf("l %-4g h %-10g total %.6g  eps|B|^2 %.6g  rest %.6g\n", d.l, d.h, d.total, d.bending_term, d.rest);
  for (const auto& s : r.signal)
    std::printf("k %-3d eps %-8g window %.5f (sharp %.5f)  F %.6g  Fhat %.6g\n", s.k, s.eps, s.smooth_window_length,
                s.window_length, s.F, s.Fhat);
  std::printf("artifacts in %s\n", r.dir.string().c_str());
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    const auto item = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad number '" + item + "' in list");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase membrane experiments"};
  app.require_subcommand(1);
  std::string root_opt;
  app.add_option("--root", root_opt, "Output root (default: $MEMBRANE_OUTPUT_ROOT or ./runs)");

  std::string scenario;
  std::size_t workers = 0;
  std::size_t max_steps = 0;
  bool no_plots = false;
  auto* run = app.add_subcommand("run", "Run a builtin scenario or a JSON scenario file");
  run->add_option("scenario", scenario, "Scenario name or path")->required();
  run->add_option("--workers", workers, "Worker threads (0: hardware concurrency)");
  run->add_option("--max-steps", max_steps, "Override flow.max_steps");
  run->add_flag("--no-plots", no_plots, "Skip SVG output");

  std::string ladder_scenario, eps_list;
  auto* ladder = app.add_subcommand("ladder", "Repeat a scenario over a list of eps values");
  ladder->add_option("scenario", ladder_scenario, "Scenario name or path")->required();
  ladder->add_option("--eps", eps_list, "Comma separated eps values")->required();
  ladder->add_option("--workers", workers, "Worker threads");

  std::vector<std::string> dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Compare completed flow runs");
  compare->add_option("dirs", dirs, "Run directories (final_state.csv + summary.json)")->required()->expected(2, -1);
  compare->add_option("--out", compare_out, "Directory for compare.md and compare.csv");

  auto* validate = app.add_subcommand("validate", "Run the invariant suite");
  auto* list = app.add_subcommand("list", "List builtin scenarios");
  std::string show_name;
  auto* show = app.add_subcommand("show", "Print the resolved scenario as JSON");
  show->add_option("scenario", show_name, "Scenario name or path")->required();

  CLI11_PARSE(app, argc, argv);
  const fs::path root = root_opt.empty() ? output_root() : fs::path(root_opt);

  try {
    if (*run) {
      auto s = load_scenario(scenario);
      if (workers) s.output.workers = workers;
      if (max_steps) s.flow.max_steps = max_steps;
      if (no_plots) s.output.plots = false;
      print_runs(run_scenario(s, root));
    } else if (*ladder) {
      auto s = load_scenario(ladder_scenario);
      if (workers) s.output.workers = workers;
      const auto eps = parse_list(eps_list);
      if (s.study.kind == "gamma_ladder") {
        s.study.eps = eps;
        print_runs(run_scenario(s, root));
      } else {
        const std::string base = s.output.dir.empty() ? s.name : s.output.dir;
        for (double e : eps) {
          auto si = s;
          si.flow.eps = e;
          char tag[64];
          std::snprintf(tag, sizeof tag, "eps_%g", e);
          si.output.dir = (fs::path(base) / tag).string();
          std::printf("== eps %g\n", e);
          print_runs(run_scenario(si, root));
        }
      }
    } else if (*compare) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      const auto rep = compare_runs(paths, compare_out.empty() ? fs::path() : fs::path(compare_out));
      std::cout << rep.markdown;
    } else if (*validate) {
      bool ok = true;
      for (const auto& c : validate_invariants()) {
        std::printf("%s %-30s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.pass;
      }
      return ok ? 0 : 1;
    } else if (*list) {
      for (const auto& n : builtin_scenario_names()) std::printf("%s\n", n.c_str());
    } else if (*show) {
      std::cout << to_json(load_scenario(show_name)) << '\n';
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
