#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "drivestyle/trajectory.hpp"

namespace drivestyle {

// Maneuver labels used for evaluation. Overtaking and sudden lane change are
// scored against the same closeness prediction but reported separately.
enum class ManeuverStyle { kOverspeeding, kOvertaking, kSuddenLaneChange, kWeaving };

std::string_view to_string(ManeuverStyle style);
std::string_view table_code(ManeuverStyle style);  // OS, OT, SLC, W
std::optional<ManeuverStyle> maneuver_style_from_string(std::string_view name);
inline constexpr std::array<ManeuverStyle, 4> kAllManeuverStyles{
    ManeuverStyle::kOverspeeding, ManeuverStyle::kOvertaking, ManeuverStyle::kSuddenLaneChange,
    ManeuverStyle::kWeaving};

struct FrameInterval {
  FrameIndex start = 0;
  FrameIndex end = 0;
};

struct AnnotationKey {
  std::string video_id;
  std::string agent_id;
  ManeuverStyle style = ManeuverStyle::kOverspeeding;

  friend auto operator<=>(const AnnotationKey&, const AnnotationKey&) = default;
};

// Per (video, agent, style): one interval per annotator.
struct AnnotationSet {
  double frame_rate_hz = 1.0;
  std::map<AnnotationKey, std::vector<FrameInterval>> entries;

  bool empty() const { return entries.empty(); }
};

// CSV `video_id,agent_id,style,annotator_id,start_frame,end_frame`.
AnnotationSet parse_annotations(std::istream& in, double frame_rate_hz);

struct GroundTruthLabel {
  std::string agent_id;
  ManeuverStyle style = ManeuverStyle::kOverspeeding;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;

  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

// CSV `agent_id,style,start_frame,end_frame` as written by the simulator.
std::vector<GroundTruthLabel> parse_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, std::span<const GroundTruthLabel> labels);

// Folds single-annotator ground truth into an annotation set (M = 1).
void add_ground_truth(AnnotationSet& set, const std::string& video_id,
                      std::span<const GroundTruthLabel> labels);

struct TemporalDistribution {
  FrameIndex support_start = 0;
  FrameIndex support_end = 0;
  std::vector<std::size_t> counts;   // c_t for t in [support_start, support_end]
  std::vector<double> probability;   // counts normalized to sum 1
  double expectation = 0.0;          // E[T], frames
};

// Throws ValidationError for an empty set or an interval with start > end.
TemporalDistribution expected_frame(std::span<const FrameInterval> annotations);

// |t_sle - expected| / f, seconds.
double tde(double t_sle_frame, double expected_frame, double frame_rate_hz);

// Model prediction for one (video, agent, style).
struct Prediction {
  AnnotationKey key;
  std::optional<double> frame;  // unset when the model has no estimate
};

struct TdeRow {
  ManeuverStyle style = ManeuverStyle::kOverspeeding;
  std::optional<double> mean_tde;  // seconds; unset when nothing matched
  std::size_t matched = 0;
  std::size_t missing = 0;
  std::vector<double> values;
};

struct TdeTable {
  std::vector<TdeRow> rows;  // one per style present in the labels, OS/OT/SLC/W order
  std::size_t missing_total = 0;

  const TdeRow* row(ManeuverStyle style) const;
};

// Labels without a matching prediction are counted as missing and excluded
// from the means.
TdeTable evaluate_run(std::span<const Prediction> predictions, const AnnotationSet& labels);

void write_tde_csv(std::ostream& out, const TdeTable& table);

}  // namespace drivestyle
