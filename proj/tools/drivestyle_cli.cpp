// drivestyle: simulate, analyze, evaluate and calibrate from the command line.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drivestyle/centrality.hpp"
#include "drivestyle/config.hpp"
#include "drivestyle/errors.hpp"
#include "drivestyle/evaluation.hpp"
#include "drivestyle/pipeline.hpp"
#include "drivestyle/simulator.hpp"
#include "drivestyle/trajectory.hpp"

namespace fs = std::filesystem;
using namespace drivestyle;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Overrides {
  std::string config;
  std::optional<double> mu, window, stride, epsilon, frame_rate;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cli", "cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cli", "cannot write '" + path.string() + "'");
  return out;
}

AnalysisConfig resolve_config(const Overrides& o) {
  AnalysisConfig c;
  if (!o.config.empty()) {
    auto in = open_input(o.config);
    c = load_analysis_config(in, o.config);
  }
  if (o.mu) c.mu = *o.mu;
  if (o.window) c.window_s = *o.window;
  if (o.stride) c.stride_s = *o.stride;
  if (o.epsilon) c.epsilon_s = *o.epsilon;
  if (o.frame_rate) c.frame_rate_hz = *o.frame_rate;
  c.validate();
  return c;
}

ScenarioConfig read_scenario(const std::string& path) {
  auto in = open_input(path);
  return load_scenario(in, path);
}

// "run.trajectories.csv" -> "run"
std::string video_id_for(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  const std::string suffix = ".trajectories";
  if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem;
}

void add_analysis_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--mu", o.mu, "squared proximity radius (m^2)");
  cmd->add_option("--window", o.window, "analysis window (s)");
  cmd->add_option("--stride", o.stride, "window stride (s); default window/2");
  cmd->add_option("--epsilon", o.epsilon, "sharpness ball radius (s)");
  cmd->add_option("--frame-rate", o.frame_rate, "trajectory frame rate (Hz)");
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 const fs::path& out_dir) {
  auto sc = read_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  const auto res = run_scenario(sc);
  {
    auto out = open_output(out_dir / (sc.name + ".trajectories.csv"));
    write_trajectories(out, res.table);
  }
  {
    auto out = open_output(out_dir / (sc.name + ".labels.csv"));
    write_ground_truth(out, res.labels);
  }
  for (const auto& c : res.collisions) {
    std::cerr << "warning: collision at frame " << c.frame << " between " << c.follower
              << " and " << c.leader << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& traj_path, const Overrides& o, const fs::path& out_dir) {
  const auto config = resolve_config(o);
  auto in = open_input(traj_path);
  const auto table = parse_trajectories(in, config.frame_rate_hz);
  const auto video = video_id_for(traj_path);
  const auto result = analyze(table, config, video);
  {
    auto out = open_output(out_dir / (video + ".report.json"));
    out << report_to_json(result).dump(2) << "\n";
  }
  {
    auto out = open_output(out_dir / (video + ".centrality.csv"));
    write_series_csv(out, result.series);
  }
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& reports, const std::vector<std::string>& labels,
                 const std::string& out_path) {
  if (reports.size() != labels.size()) {
    throw ValidationError("cli", "--report and --labels must be given the same number of times");
  }
  std::vector<Prediction> predictions;
  AnnotationSet set;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    nlohmann::json doc;
    {
      auto in = open_input(reports[i]);
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("cli", reports[i] + ": " + e.what());
      }
    }
    auto p = predictions_from_report(doc);
    predictions.insert(predictions.end(), p.begin(), p.end());
    const double rate = doc.at("frame_rate_hz").get<double>();
    if (set.entries.empty()) set.frame_rate_hz = rate;
    if (set.frame_rate_hz != rate) throw ValidationError("cli", "reports disagree on frame rate");

    auto in = open_input(labels[i]);
    std::string header;
    std::getline(in, header);
    in.clear();
    in.seekg(0);
    if (header.starts_with("video_id")) {
      const auto ann = parse_annotations(in, rate);
      for (const auto& [k, v] : ann.entries) {
        auto& dst = set.entries[k];
        dst.insert(dst.end(), v.begin(), v.end());
      }
    } else {
      add_ground_truth(set, doc.at("video_id").get<std::string>(), parse_ground_truth(in));
    }
  }
  if (set.entries.empty()) std::cerr << "warning: label set is empty\n";
  const auto table = evaluate_run(predictions, set);
  if (table.missing_total > 0) {
    std::cerr << "warning: " << table.missing_total << " labeled maneuver(s) without prediction\n";
  }
  if (out_path.empty()) {
    write_tde_csv(std::cout, table);
  } else {
    auto out = open_output(out_path);
    write_tde_csv(out, table);
  }
  return 0;
}

int cmd_calibrate(const std::vector<std::string>& scenario_paths, std::optional<std::uint64_t> seed,
                  const Overrides& o, const CalibrationOptions& options,
                  const std::string& out_path) {
  const auto config = resolve_config(o);
  std::vector<ScenarioConfig> scenarios;
  for (std::size_t i = 0; i < scenario_paths.size(); ++i) {
    scenarios.push_back(read_scenario(scenario_paths[i]));
    if (seed) scenarios.back().seed = *seed + i;
  }
  const auto result = calibrate(scenarios, config, options);
  const auto text = thresholds_to_json(result).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    auto out = open_output(out_path);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving-style analysis of multi-agent trajectories"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "print version and schema versions");

  Overrides overrides;
  std::string scenario, trajectories, out, out_file;
  std::vector<std::string> scenarios, reports, labels;
  std::optional<std::uint64_t> seed;
  CalibrationOptions cal;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write trajectories + labels");
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--seed", seed, "override the scenario seed");
  sim->add_option("--out", out, "output directory")->required();

  auto* ana = app.add_subcommand("analyze", "write a style report and centrality CSV");
  ana->add_option("--trajectories", trajectories, "trajectory CSV")->required();
  ana->add_option("--out", out, "output directory")->required();
  add_analysis_flags(ana, overrides);

  auto* eva = app.add_subcommand("evaluate", "per-style TDE table from reports and labels");
  eva->add_option("--report", reports, "report JSON (repeatable)")->required();
  eva->add_option("--labels", labels, "labels CSV paired with each --report")->required();
  eva->add_option("--out", out_file, "output CSV (default stdout)");

  auto* cali = app.add_subcommand("calibrate", "derive style thresholds from conservative agents");
  cali->add_option("--scenario", scenarios, "calibration scenario JSON (repeatable)");
  cali->add_option("--seed", seed, "base seed; scenario i uses seed + i");
  cali->add_option("--quantile", cal.quantile, "quantile of conservative maxima")
      ->check(CLI::Range(0.0, 1.0));
  cali->add_option("--headroom", cal.headroom, "multiplier on the quantile");
  cali->add_option("--out", out_file, "thresholds JSON (default stdout)");
  add_analysis_flags(cali, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (show_version) {
    std::cout << "drivestyle " << kVersion << " (report schema " << kReportSchemaVersion
              << ", thresholds schema " << kThresholdsSchemaVersion << ")\n";
    return 0;
  }
  try {
    if (*sim) return cmd_simulate(scenario, seed, out);
    if (*ana) return cmd_analyze(trajectories, overrides, out);
    if (*eva) return cmd_evaluate(reports, labels, out_file);
    if (*cali) return cmd_calibrate(scenarios, seed, overrides, cal, out_file);
    std::cerr << app.help();
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
