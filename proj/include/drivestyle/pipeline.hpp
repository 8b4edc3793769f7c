#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "drivestyle/centrality.hpp"
#include "drivestyle/config.hpp"
#include "drivestyle/evaluation.hpp"
#include "drivestyle/simulator.hpp"
#include "drivestyle/style.hpp"
#include "drivestyle/trajectory.hpp"

namespace drivestyle {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kThresholdsSchemaVersion = 1;

// Critical points of overlapping windows merged within 2 * epsilon.
struct WeavingCluster {
  double time = 0.0;       // sharpness-weighted mean of member times
  double sharpness = 0.0;  // largest member sharpness
  double weight = 0.0;     // sum of member sharpness
  std::size_t members = 0;
  bool significant = false;  // sharpness above the weaving threshold
};

// Whole-run view of one agent. Each curve sample at frame k comes from the
// quadratic fitted on the window centered at k (shifted to stay inside the
// agent's run; the whole run when it is shorter than the window).
struct AgentSummary {
  std::string agent_id;
  FrameWindow run;
  StyleCurve overspeeding;
  StyleCurve overtaking;
  std::vector<WeavingCluster> weaving;  // every non-flat cluster
  std::size_t weaving_significant = 0;  // |T|: clusters above the sharpness threshold
  double weaving_sharpness_max = 0.0;
  std::vector<Style> detected;
  GlobalLabel global_label = GlobalLabel::kConservative;

  // Weight-averaged time of all clusters; unset when there are none. Timing
  // does not depend on the detection threshold, like t_SLE of the curves.
  std::optional<double> weaving_time() const;
};

struct AnalysisResult {
  std::string video_id;
  double frame_rate_hz = 0.0;
  AnalysisConfig config;
  std::vector<StyleReport> windows;  // strided windows, ordered by window then agent
  std::vector<AgentSummary> agents;  // ordered by agent id
  SeriesMap series;
};

// Ingested table -> graphs -> centralities -> fits -> SLE/SIE -> labels.
// The table's own frame rate is used for time conversion.
AnalysisResult analyze(const TrajectoryTable& table, const AnalysisConfig& config,
                       const std::string& video_id);

// Strided analysis windows over [first, last]; a single window when the span
// is shorter than `length` frames.
std::vector<FrameWindow> analysis_windows(FrameIndex first, FrameIndex last, FrameIndex length,
                                          FrameIndex stride);

// One prediction per (agent, style): OS from the degree curve, OT and SLC from
// the closeness curve, W from the weaving clusters.
std::vector<Prediction> predictions_from(const AnalysisResult& result);

nlohmann::json report_to_json(const AnalysisResult& result);
// Reads predictions back from a report document; throws ValidationError on a
// schema mismatch.
std::vector<Prediction> predictions_from_report(const nlohmann::json& report);

struct CalibrationSample {
  std::string scenario;
  std::string agent_id;
  double degree_sle_max = 0.0;
  double closeness_sle_max = 0.0;
  double weaving_sharpness_max = 0.0;
};

struct CalibrationOptions {
  double quantile = 1.0;  // of conservative-agent maxima
  double headroom = 1.25; // multiplier applied to the quantile
  double floor = 1e-6;    // lower bound so thresholds stay strictly positive
};

struct CalibrationResult {
  StyleThresholds thresholds;
  std::vector<CalibrationSample> samples;
  CalibrationOptions options;
};

// Linear-interpolated quantile of a non-empty sample.
double quantile(std::vector<double> values, double q);

// Simulates each scenario, analyzes it and derives thresholds from the
// conservative-class agents. Throws ValidationError when the set is empty or
// has no conservative agents.
CalibrationResult calibrate(std::span<const ScenarioConfig> scenarios,
                            const AnalysisConfig& config, const CalibrationOptions& options = {});

nlohmann::json thresholds_to_json(const CalibrationResult& result);

}  // namespace drivestyle
