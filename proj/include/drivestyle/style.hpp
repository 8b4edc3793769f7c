#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/centrality.hpp"
#include "drivestyle/config.hpp"
#include "drivestyle/regression.hpp"

namespace drivestyle {

enum class Style { kOverspeeding, kOvertakingOrSuddenLaneChange, kWeaving, kConservative };
enum class GlobalLabel { kAggressive, kConservative };

std::string_view to_string(Style style);
std::string_view to_string(GlobalLabel label);

// SLE(t) = |zeta'(t)|, SIE(t) = |zeta''(t)| sampled at the given times.
struct StyleCurve {
  std::vector<double> times;
  std::vector<double> sle;
  std::vector<double> sie;
  double sle_max = 0.0;
  double t_sle = 0.0;  // earliest sample attaining sle_max
};

// Sharpness at or below this counts as flat.
inline constexpr double kFlatSharpness = 1e-12;

StyleCurve sle_sie(const CentralityPolynomial& poly, std::span<const double> sample_times);

struct CriticalPoint {
  double time = 0.0;
  double sharpness = 0.0;  // max |zeta'| over [t_c - eps, t_c + eps]
};

// Zero crossings of zeta_c' strictly inside (t_start, t_end) whose sharpness is
// non-zero. A quadratic has at most one.
std::vector<CriticalPoint> detect_weaving(const CentralityPolynomial& closeness_poly,
                                          double t_start, double t_end, double epsilon);

struct WeavingEntry {
  std::vector<CriticalPoint> critical_points;  // the set T
  std::size_t significant_count = 0;           // points above the sharpness threshold
  double sle = 0.0;                            // |T|
  std::vector<double> sie;                     // sharpness of each point
};

struct ConservativeEntry {
  bool likely = false;
  double degree_sle_max = 0.0;
  double closeness_sle_max = 0.0;
};

struct StyleReport {
  std::string agent_id;
  FrameWindow window;
  double t_start = 0.0;
  double t_end = 0.0;
  CentralityPolynomial degree_poly;
  CentralityPolynomial closeness_poly;
  StyleCurve overspeeding;  // degree centrality
  StyleCurve overtaking;    // closeness centrality; also sudden lane change
  WeavingEntry weaving;
  ConservativeEntry conservative;
  std::vector<Style> detected;
  GlobalLabel global_label = GlobalLabel::kConservative;
};

struct ClassifyInputs {
  std::string agent_id;
  FrameWindow window;
  std::vector<double> sample_times;
  CentralityPolynomial degree_poly;
  CentralityPolynomial closeness_poly;
  std::vector<CriticalPoint> weaving_set;
};

// Applies the style table: overspeeding from the degree SLE, overtaking /
// sudden lane change from the closeness SLE, weaving from the count of sharp
// critical points. Conservative when none of the three fires.
StyleReport classify(const ClassifyInputs& inputs, const StyleThresholds& thresholds);

}  // namespace drivestyle
