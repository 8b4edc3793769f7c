#include "drivestyle/config.hpp"

#include <cmath>
#include <istream>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {

constexpr const char* kModule = "config";

template <typename T>
void read_if_present(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, std::string("key '") + key + "': " + e.what());
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(kModule, std::string(name) + " must be positive and finite");
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError(kModule, std::string(name) + " must be non-negative and finite");
  }
}

}  // namespace

// Output of `drivestyle calibrate` over scenarios/calibration/*.json (seeds
// 100..104) with the default window: 1.25 x the largest conservative maximum
// over both the centered-fit curves and the strided window reports.
StyleThresholds default_thresholds() {
  StyleThresholds t;
  t.degree = 1.1208502631821964;
  t.closeness = 0.055621110810267355;
  t.weaving_sharpness = 0.011888403214164974;
  t.weaving_min_count = 1;
  return t;
}

void AnalysisConfig::validate() const {
  require_positive(frame_rate_hz, "frame_rate_hz");
  require_positive(mu, "mu");
  require_positive(window_s, "window");
  require_non_negative(stride_s, "stride");
  require_positive(epsilon_s, "epsilon");
  if (capacity < 2) throw ValidationError(kModule, "capacity must be at least 2");
  if (alpha.mode == AlphaPolicy::Mode::kFixed) {
    require_non_negative(alpha.fixed_alpha, "alpha.value");
  } else {
    require_positive(alpha.kappa_cap, "alpha.kappa_cap");
  }
  require_positive(thresholds.degree, "thresholds.degree");
  require_positive(thresholds.closeness, "thresholds.closeness");
  require_positive(thresholds.weaving_sharpness, "thresholds.weaving_sharpness");
  if (thresholds.weaving_min_count < 1) {
    throw ValidationError(kModule, "thresholds.weaving_min_count must be at least 1");
  }
}

AnalysisConfig analysis_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError(kModule, "run config must be a JSON object");
  AnalysisConfig c;
  read_if_present(doc, "frame_rate_hz", c.frame_rate_hz);
  read_if_present(doc, "mu", c.mu);
  read_if_present(doc, "window", c.window_s);
  read_if_present(doc, "stride", c.stride_s);
  read_if_present(doc, "epsilon", c.epsilon_s);
  read_if_present(doc, "capacity", c.capacity);
  if (doc.contains("alpha")) {
    const auto& a = doc.at("alpha");
    std::string mode = "condition_cap";
    read_if_present(a, "mode", mode);
    if (mode == "condition_cap") {
      c.alpha.mode = AlphaPolicy::Mode::kConditionCap;
    } else if (mode == "fixed") {
      c.alpha.mode = AlphaPolicy::Mode::kFixed;
    } else {
      throw ValidationError(kModule, "alpha.mode must be 'condition_cap' or 'fixed'");
    }
    read_if_present(a, "value", c.alpha.fixed_alpha);
    read_if_present(a, "kappa_cap", c.alpha.kappa_cap);
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc.at("thresholds");
    read_if_present(t, "degree", c.thresholds.degree);
    read_if_present(t, "closeness", c.thresholds.closeness);
    read_if_present(t, "weaving_sharpness", c.thresholds.weaving_sharpness);
    read_if_present(t, "weaving_min_count", c.thresholds.weaving_min_count);
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const AnalysisConfig& c) {
  return {
      {"frame_rate_hz", c.frame_rate_hz},
      {"mu", c.mu},
      {"window", c.window_s},
      {"stride", c.effective_stride_s()},
      {"epsilon", c.epsilon_s},
      {"capacity", c.capacity},
      {"alpha",
       {{"mode", c.alpha.mode == AlphaPolicy::Mode::kFixed ? "fixed" : "condition_cap"},
        {"value", c.alpha.fixed_alpha},
        {"kappa_cap", c.alpha.kappa_cap}}},
      {"thresholds",
       {{"degree", c.thresholds.degree},
        {"closeness", c.thresholds.closeness},
        {"weaving_sharpness", c.thresholds.weaving_sharpness},
        {"weaving_min_count", c.thresholds.weaving_min_count}}},
  };
}

AnalysisConfig load_analysis_config(std::istream& in, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(kModule, origin + ": " + e.what());
  }
  return analysis_config_from_json(doc);
}

}  // namespace drivestyle
