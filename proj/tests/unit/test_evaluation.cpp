#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "drivestyle/errors.hpp"
#include "drivestyle/evaluation.hpp"

using namespace drivestyle;

TEST_CASE("expected frame fixtures") {
  SUBCASE("single annotator") {
    const std::vector<FrameInterval> a{{10, 12}};
    const auto d = expected_frame(a);
    CHECK(d.support_start == 10);
    CHECK(d.support_end == 12);
    CHECK(d.counts == std::vector<std::size_t>{1, 1, 1});
    CHECK(d.expectation == 11.0);
  }
  SUBCASE("two overlapping annotators") {
    const std::vector<FrameInterval> a{{10, 12}, {12, 14}};
    const auto d = expected_frame(a);
    CHECK(d.counts == std::vector<std::size_t>{1, 1, 2, 1, 1});
    CHECK(std::abs(d.expectation - 12.0) <= 1e-12);
  }
  SUBCASE("point annotation") {
    const std::vector<FrameInterval> a{{7, 7}};
    CHECK(expected_frame(a).expectation == 7.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(expected_frame(std::vector<FrameInterval>{}), ValidationError);
    CHECK_THROWS_AS(expected_frame(std::vector<FrameInterval>{{5, 4}}), ValidationError);
  }
}

TEST_CASE("distribution properties") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> s(0, 50), len(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FrameInterval> a;
    for (int m = 0; m < 5; ++m) {
      const int st = s(rng);
      a.push_back({st, st + len(rng)});
    }
    const auto d = expected_frame(a);
    double sum = 0.0;
    for (double p : d.probability) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(d.expectation >= static_cast<double>(d.support_start));
    CHECK(d.expectation <= static_cast<double>(d.support_end));
    for (auto c : d.counts) CHECK(c <= a.size());

    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(expected_frame(shuffled).expectation == doctest::Approx(d.expectation).epsilon(1e-12));

    const std::vector<FrameInterval> one{a[0]};
    const std::vector<FrameInterval> many(4, a[0]);
    CHECK(expected_frame(many).expectation ==
          doctest::Approx(expected_frame(one).expectation).epsilon(1e-12));
  }
}

TEST_CASE("time deviation error") {
  CHECK(std::abs(tde(7, 5, 30.0) - 0.0666666666666667) <= 1e-9);
  CHECK(tde(11, 11, 10.0) == 0.0);
  CHECK(tde(20, 10, 2.0) == 5.0);
  CHECK(tde(10, 20, 2.0) == tde(20, 10, 2.0));
  CHECK(tde(20, 10, 4.0) == doctest::Approx(tde(20, 10, 2.0) / 2.0));
}

TEST_CASE("annotation parsing") {
  std::istringstream in(
      "video_id,agent_id,style,annotator_id,start_frame,end_frame\n"
      "v1,a,OS,p1,10,12\nv1,a,overspeeding,p2,12,14\nv1,b,W,p1,3,3\n");
  const auto set = parse_annotations(in, 30.0);
  CHECK(set.frame_rate_hz == 30.0);
  REQUIRE(set.entries.size() == 2);
  CHECK(set.entries.at({"v1", "a", ManeuverStyle::kOverspeeding}).size() == 2);

  std::istringstream bad("video_id,agent_id,style,annotator_id,start_frame,end_frame\n"
                         "v1,a,OS,p1,12,10\n");
  CHECK_THROWS_AS(parse_annotations(bad, 30.0), ParseError);
  std::istringstream unknown("video_id,agent_id,style,annotator_id,start_frame,end_frame\n"
                             "v1,a,tailgating,p1,1,2\n");
  CHECK_THROWS(parse_annotations(unknown, 30.0));
}

TEST_CASE("ground truth round trip") {
  const std::vector<GroundTruthLabel> labels{{"a", ManeuverStyle::kWeaving, 5, 95},
                                             {"b", ManeuverStyle::kSuddenLaneChange, 40, 70}};
  std::ostringstream out;
  write_ground_truth(out, labels);
  std::istringstream in(out.str());
  CHECK(parse_ground_truth(in) == labels);
}

TEST_CASE("evaluate run") {
  AnnotationSet set;
  set.frame_rate_hz = 10.0;
  SUBCASE("empty labels give an empty table") {
    const auto t = evaluate_run({}, set);
    CHECK(t.rows.empty());
    CHECK(t.missing_total == 0);
  }
  SUBCASE("one predicted, one missing") {
    const std::vector<GroundTruthLabel> labels{{"a", ManeuverStyle::kOverspeeding, 10, 20},
                                               {"a", ManeuverStyle::kWeaving, 30, 50}};
    add_ground_truth(set, "vid", labels);
    const std::vector<Prediction> preds{{{"vid", "a", ManeuverStyle::kOverspeeding}, 17.0},
                                        {{"vid", "a", ManeuverStyle::kWeaving}, std::nullopt}};
    const auto t = evaluate_run(preds, set);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].style == ManeuverStyle::kOverspeeding);
    REQUIRE(t.rows[0].mean_tde.has_value());
    CHECK(*t.rows[0].mean_tde == doctest::Approx(0.2));
    CHECK_FALSE(t.row(ManeuverStyle::kWeaving)->mean_tde.has_value());
    CHECK(t.row(ManeuverStyle::kWeaving)->missing == 1);
    CHECK(t.missing_total == 1);
    CHECK(t.row(ManeuverStyle::kOvertaking) == nullptr);

    std::ostringstream out;
    write_tde_csv(out, t);
    CHECK(out.str() == "style,mean_tde_s,matched,missing\nOS,0.2,1,0\nW,,0,1\n");
  }
}

TEST_CASE("style codes") {
  CHECK(maneuver_style_from_string("SLC") == ManeuverStyle::kSuddenLaneChange);
  CHECK(maneuver_style_from_string("overtaking") == ManeuverStyle::kOvertaking);
  CHECK_FALSE(maneuver_style_from_string("tailgating").has_value());
}
