#include "drivestyle/style.hpp"

#include <algorithm>
#include <cmath>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {
constexpr const char* kModule = "style_estimation";
}

std::string_view to_string(Style style) {
  switch (style) {
    case Style::kOverspeeding: return "overspeeding";
    case Style::kOvertakingOrSuddenLaneChange: return "overtaking_or_sudden_lane_change";
    case Style::kWeaving: return "weaving";
    case Style::kConservative: return "conservative";
  }
  return "conservative";
}

std::string_view to_string(GlobalLabel label) {
  return label == GlobalLabel::kAggressive ? "aggressive" : "conservative";
}

StyleCurve sle_sie(const CentralityPolynomial& poly, std::span<const double> sample_times) {
  StyleCurve c;
  c.times.assign(sample_times.begin(), sample_times.end());
  c.sle.reserve(c.times.size());
  c.sie.reserve(c.times.size());
  const auto first = derivative(poly, 1);
  const double curvature = std::abs(2.0 * poly.beta[2]);
  bool have_max = false;
  for (const double t : c.times) {
    const double sle = std::abs(first.evaluate(t));
    c.sle.push_back(sle);
    c.sie.push_back(curvature);
    if (!have_max || sle > c.sle_max) {
      c.sle_max = sle;
      c.t_sle = t;
      have_max = true;
    }
  }
  return c;
}

std::vector<CriticalPoint> detect_weaving(const CentralityPolynomial& closeness_poly,
                                          double t_start, double t_end, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractViolation(kModule, "epsilon must be positive");
  std::vector<CriticalPoint> out;
  const double b1 = closeness_poly.beta[1];
  const double b2 = closeness_poly.beta[2];
  // zeta' = b1 + 2 b2 t is linear, so it vanishes at one point or nowhere
  // (b2 == 0 is either monotone or the flat case we disregard).
  if (b2 == 0.0) return out;
  const double tc = -b1 / (2.0 * b2);
  if (!(tc > t_start && tc < t_end)) return out;
  // |zeta'| on the ball peaks at its edges: |2 b2| * eps, versus 0 at tc.
  const double sharpness = std::abs(2.0 * b2) * epsilon;
  if (sharpness > kFlatSharpness) out.push_back({tc, sharpness});
  return out;
}

StyleReport classify(const ClassifyInputs& in, const StyleThresholds& thresholds) {
  if (!(thresholds.degree > 0.0) || !(thresholds.closeness > 0.0) ||
      !(thresholds.weaving_sharpness > 0.0) || thresholds.weaving_min_count == 0) {
    throw ContractViolation(kModule, "thresholds must be strictly positive");
  }
  StyleReport r;
  r.agent_id = in.agent_id;
  r.window = in.window;
  r.t_start = in.sample_times.empty() ? 0.0 : in.sample_times.front();
  r.t_end = in.sample_times.empty() ? 0.0 : in.sample_times.back();
  r.degree_poly = in.degree_poly;
  r.closeness_poly = in.closeness_poly;
  r.overspeeding = sle_sie(in.degree_poly, in.sample_times);
  r.overtaking = sle_sie(in.closeness_poly, in.sample_times);

  r.weaving.critical_points = in.weaving_set;
  r.weaving.sle = static_cast<double>(in.weaving_set.size());
  for (const auto& cp : in.weaving_set) {
    r.weaving.sie.push_back(cp.sharpness);
    if (cp.sharpness > thresholds.weaving_sharpness) ++r.weaving.significant_count;
  }

  if (r.overspeeding.sle_max > thresholds.degree) r.detected.push_back(Style::kOverspeeding);
  if (r.overtaking.sle_max > thresholds.closeness) {
    r.detected.push_back(Style::kOvertakingOrSuddenLaneChange);
  }
  if (r.weaving.significant_count >= thresholds.weaving_min_count) {
    r.detected.push_back(Style::kWeaving);
  }

  r.conservative.degree_sle_max = r.overspeeding.sle_max;
  r.conservative.closeness_sle_max = r.overtaking.sle_max;
  r.conservative.likely = r.detected.empty();
  if (r.conservative.likely) {
    r.detected.push_back(Style::kConservative);
    r.global_label = GlobalLabel::kConservative;
  } else {
    r.global_label = GlobalLabel::kAggressive;
  }
  return r;
}

}  // namespace drivestyle
