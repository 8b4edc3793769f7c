#include <doctest.h>

#include "drivestyle/errors.hpp"
#include "drivestyle/style.hpp"

using namespace drivestyle;

namespace {
CentralityPolynomial poly(double b0, double b1, double b2) {
  CentralityPolynomial p;
  p.beta = {b0, b1, b2};
  return p;
}
const std::vector<double> kWindow02{0.0, 0.5, 1.0, 1.5, 2.0};

StyleThresholds thresholds() { return {0.5, 0.01, 0.001, 1}; }
}  // namespace

TEST_CASE("constant polynomial has zero SLE and SIE") {
  const auto c = sle_sie(poly(5, 0, 0), kWindow02);
  for (double v : c.sle) CHECK(v == 0.0);
  for (double v : c.sie) CHECK(v == 0.0);
  CHECK(c.sle_max == 0.0);
  CHECK(c.t_sle == 0.0);
}

TEST_CASE("linear polynomial ties break to the earliest time") {
  const auto c = sle_sie(poly(0, 3, 0), kWindow02);
  for (double v : c.sle) CHECK(v == 3.0);
  CHECK(c.sle_max == 3.0);
  CHECK(c.t_sle == 0.0);
}

TEST_CASE("pure quadratic peaks at the window end") {
  const auto c = sle_sie(poly(0, 0, 1), kWindow02);
  CHECK(c.sle_max == 4.0);
  CHECK(c.t_sle == 2.0);
  for (double v : c.sie) CHECK(v == 2.0);
  for (std::size_t i = 0; i < c.times.size(); ++i) CHECK(c.sle[i] == 2.0 * c.times[i]);
}

TEST_CASE("argmax is invariant to positive scaling") {
  const auto a = sle_sie(poly(1, -2, 0.7), kWindow02);
  const auto b = sle_sie(poly(3, -6, 2.1), kWindow02);
  CHECK(b.t_sle == a.t_sle);
  CHECK(b.sle_max == doctest::Approx(3 * a.sle_max));
  CHECK(b.sie[0] == doctest::Approx(3 * a.sie[0]));
}

TEST_CASE("weaving critical points") {
  const auto pts = detect_weaving(poly(0, 0, 1), -1.0, 1.0, 0.1);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].time == 0.0);
  CHECK(pts[0].sharpness == doctest::Approx(0.2).epsilon(1e-15));

  for (double eps : {0.01, 0.5, 3.0}) CHECK(detect_weaving(poly(4, 0, 0), -1, 1, eps).empty());
  // Derivative without a sign change inside the window.
  CHECK(detect_weaving(poly(0, 1, 0), -1, 1, 0.1).empty());
  CHECK(detect_weaving(poly(0, -4, 1), -1, 1, 0.1).empty());  // t_c = 2 outside
  // Critical point on the boundary is not strictly inside.
  CHECK(detect_weaving(poly(0, 0, 1), 0.0, 1.0, 0.1).empty());
  CHECK_THROWS_AS(detect_weaving(poly(0, 0, 1), -1, 1, 0.0), ContractViolation);
}

TEST_CASE("classification") {
  ClassifyInputs in;
  in.agent_id = "a";
  in.window = {0, 4};
  in.sample_times = kWindow02;
  in.degree_poly = poly(0, 0, 0);
  in.closeness_poly = poly(0.05, 0, 0);

  SUBCASE("flat series are conservative") {
    const auto r = classify(in, thresholds());
    CHECK(r.global_label == GlobalLabel::kConservative);
    CHECK(r.conservative.likely);
    REQUIRE(r.detected.size() == 1);
    CHECK(r.detected[0] == Style::kConservative);
    CHECK(r.overspeeding.sle_max == 0.0);
  }
  SUBCASE("steep degree is overspeeding") {
    in.degree_poly = poly(0, 1, 0);
    const auto r = classify(in, thresholds());
    CHECK(r.global_label == GlobalLabel::kAggressive);
    CHECK(r.detected == std::vector<Style>{Style::kOverspeeding});
    CHECK_FALSE(r.conservative.likely);
  }
  SUBCASE("steep closeness is overtaking or sudden lane change") {
    in.closeness_poly = poly(0, 0.05, 0);
    const auto r = classify(in, thresholds());
    CHECK(r.detected == std::vector<Style>{Style::kOvertakingOrSuddenLaneChange});
  }
  SUBCASE("sharp critical point is weaving") {
    in.weaving_set = {{1.0, 0.002}, {1.5, 0.0005}};
    const auto r = classify(in, thresholds());
    CHECK(r.weaving.significant_count == 1);
    CHECK(r.weaving.sle == 2.0);
    CHECK(r.weaving.sie.size() == 2);
    CHECK(r.detected == std::vector<Style>{Style::kWeaving});
  }
  SUBCASE("thresholds must be positive") {
    CHECK_THROWS_AS(classify(in, {0.0, 1.0, 1.0, 1}), ContractViolation);
    CHECK_THROWS_AS(classify(in, {1.0, 1.0, 1.0, 0}), ContractViolation);
  }
}

TEST_CASE("style names") {
  CHECK(to_string(Style::kOvertakingOrSuddenLaneChange) == "overtaking_or_sudden_lane_change");
  CHECK(to_string(GlobalLabel::kAggressive) == "aggressive");
}
