#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace drivestyle {

// How the Tikhonov magnitude is chosen for each fit.
struct AlphaPolicy {
  enum class Mode {
    kConditionCap,  // smallest grid alpha whose regularized kappa <= kappa_cap
    kFixed,         // always `fixed_alpha`
  };
  Mode mode = Mode::kConditionCap;
  double fixed_alpha = 0.0;
  double kappa_cap = 1e6;
};

// Per-style decision thresholds. A style is flagged when its SLE_max exceeds
// the threshold; weaving counts critical points whose sharpness exceeds
// `weaving_sharpness`.
struct StyleThresholds {
  double degree = 0.0;
  double closeness = 0.0;
  double weaving_sharpness = 0.0;
  std::size_t weaving_min_count = 1;
};

StyleThresholds default_thresholds();

struct AnalysisConfig {
  double frame_rate_hz = 10.0;
  double mu = 100.0;          // m^2, squared proximity radius
  double window_s = 5.0;      // analysis window length
  double stride_s = 0.0;      // <= 0 means window_s / 2
  double epsilon_s = 0.5;     // sharpness ball radius
  std::size_t capacity = 256; // cumulative adjacency size N
  AlphaPolicy alpha;
  StyleThresholds thresholds = default_thresholds();

  double effective_stride_s() const { return stride_s > 0.0 ? stride_s : window_s / 2.0; }

  // Throws ValidationError naming the first offending field.
  void validate() const;
};

AnalysisConfig analysis_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AnalysisConfig& config);

// Reads a JSON run configuration; absent keys keep their defaults.
AnalysisConfig load_analysis_config(std::istream& in, const std::string& origin = "<stream>");

}  // namespace drivestyle
