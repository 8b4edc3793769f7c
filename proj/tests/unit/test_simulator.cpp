#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "drivestyle/errors.hpp"
#include "drivestyle/simulator.hpp"

using namespace drivestyle;

namespace {

SimAgent make(const std::string& id, DriverClass c, double pos, double speed) {
  SimAgent a;
  a.id = id;
  a.driver_class = c;
  a.params = params_for(c);
  a.position = pos;
  a.speed = speed;
  return a;
}

AgentSpawn spawn(const std::string& id, int lane, double pos, double speed,
                 std::optional<double> v0 = std::nullopt,
                 DriverClass c = DriverClass::kConservative, bool mobil = false) {
  AgentSpawn s;
  s.id = id;
  s.driver_class = c;
  s.lane = lane;
  s.position = pos;
  s.speed = speed;
  s.desired_speed = v0;
  s.mobil = mobil;
  return s;
}

std::string csv_of(const ScenarioResult& r) {
  std::ostringstream out;
  write_trajectories(out, r.table);
  write_ground_truth(out, r.labels);
  return out.str();
}

}  // namespace

TEST_CASE("driver classes follow the parameter table") {
  const auto c = conservative_params();
  CHECK(c.time_gap == 1.5);
  CHECK(c.min_gap == 5.0);
  CHECK(c.max_accel == 3.0);
  CHECK(c.comfort_decel == 6.0);
  CHECK(c.politeness == 0.5);
  CHECK(c.accel_threshold == 0.2);
  CHECK(c.safe_decel == 3.0);
  CHECK(c.desired_speed == 25.0);
  const auto a = aggressive_params();
  CHECK(a.time_gap == 1.2);
  CHECK(a.min_gap == 2.5);
  CHECK(a.max_accel == 6.0);
  CHECK(a.comfort_decel == 9.0);
  CHECK(a.politeness == 0.0);
  CHECK(a.accel_threshold == 0.0);
  CHECK(a.safe_decel == 9.0);
  CHECK(a.desired_speed == 40.0);
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.politeness = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("IDM anchors") {
  const auto p = conservative_params();
  CHECK(idm_acceleration(p, 0.0, std::nullopt) == p.max_accel);
  CHECK(idm_acceleration(p, p.desired_speed, std::nullopt) == 0.0);
  const double s_star = desired_gap(p, 20.0, 0.0);
  CHECK(s_star == doctest::Approx(5.0 + 20.0 * 1.5));
  CHECK(idm_acceleration(p, 20.0, LeaderState{s_star, 20.0}) ==
        doctest::Approx(-1.2288).epsilon(1e-12));
  CHECK(idm_acceleration(p, 20.0, LeaderState{0.0, 20.0}) == -p.comfort_decel);
  CHECK(idm_acceleration(p, 20.0, LeaderState{-1.0, 20.0}) == -p.comfort_decel);
  // A fast-opening gap never pushes s* below s0.
  CHECK(desired_gap(p, 10.0, -30.0) == p.min_gap);
}

TEST_CASE("IDM never exceeds the maximum acceleration") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> v(0, 50), gap(0.1, 200);
  for (const auto c : {DriverClass::kConservative, DriverClass::kAggressive}) {
    const auto p = params_for(c);
    for (int i = 0; i < 2000; ++i) {
      CHECK(idm_acceleration(p, v(rng), LeaderState{gap(rng), v(rng)}) <= p.max_accel);
      CHECK(idm_acceleration(p, v(rng), std::nullopt) <= p.max_accel);
    }
  }
}

TEST_CASE("MOBIL: blocked aggressive ego with an empty target lane") {
  MobilScene s;
  s.ego = make("ego", DriverClass::kAggressive, 100, 30);
  s.current_leader = make("slow", DriverClass::kConservative, 130, 15);
  const auto d = mobil_decision(s, 5.0);
  CHECK(d.safe);
  CHECK(d.incentive == doctest::Approx(d.accelerations.ego_after - d.accelerations.ego));
  CHECK(d.incentive > 0.0);
  CHECK(d.approved);
}

TEST_CASE("MOBIL: unsafe target follower is rejected") {
  MobilScene s;
  s.ego = make("ego", DriverClass::kAggressive, 100, 15);
  s.current_leader = make("slow", DriverClass::kConservative, 120, 5);
  s.target_follower = make("fast", DriverClass::kConservative, 75, 25);
  const auto d = mobil_decision(s, 5.0);
  CHECK(d.accelerations.new_follower_after < -s.ego.params.safe_decel);
  CHECK(d.incentive > 0.0);
  CHECK_FALSE(d.safe);
  CHECK_FALSE(d.approved);
}

TEST_CASE("MOBIL: overlapping target slot is unsafe") {
  MobilScene s;
  s.ego = make("ego", DriverClass::kAggressive, 100, 20);
  s.target_leader = make("beside", DriverClass::kConservative, 103, 20);
  const auto d = mobil_decision(s, 5.0);
  CHECK_FALSE(d.safe);
  CHECK_FALSE(d.approved);
}

TEST_CASE("MOBIL: symmetric lanes give no incentive") {
  MobilScene s;
  s.ego = make("ego", DriverClass::kConservative, 100, 20);
  s.current_leader = make("l", DriverClass::kConservative, 140, 20);
  s.target_leader = make("l2", DriverClass::kConservative, 140, 20);
  s.current_follower = make("f", DriverClass::kConservative, 60, 20);
  s.target_follower = make("f2", DriverClass::kConservative, 60, 20);
  const auto d = mobil_decision(s, 5.0);
  CHECK(d.incentive == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(d.approved);
}

TEST_CASE("MOBIL: incentive with politeness one is swap invariant") {
  MobilAccelerations a{0.0, 1.0, 0.0, -1.0, 0.0, 0.5};
  MobilAccelerations b{0.0, 1.0, 0.0, 0.5, 0.0, -1.0};
  CHECK(mobil_incentive(a, 1.0) == mobil_incentive(b, 1.0));
  MobilAccelerations c{0.0, 2.0, 0.0, -2.0, 0.0, 0.0};
  CHECK(mobil_incentive(c, 1.0) == 0.0);
}

TEST_CASE("single agent at desired speed") {
  ScenarioConfig c;
  c.agents = {spawn("a", 0, 0, 25, 25.0)};
  World w(c);
  w.step(c.timestep);
  CHECK(w.agents()[0].position == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(w.agents()[0].speed == 25.0);
  CHECK_THROWS_AS(w.step(0.2), ContractViolation);
}

TEST_CASE("platoon behind a slow leader settles at the IDM equilibrium gap") {
  ScenarioConfig c;
  c.lanes = 1;
  c.duration = 300;
  c.road_length = 10000;
  c.agents = {spawn("lead", 0, 400, 10, 10.0)};
  for (int k = 1; k <= 4; ++k) c.agents.push_back(spawn("f" + std::to_string(k), 0, 400 - 60.0 * k, 10, 25.0));
  World w(c);
  for (FrameIndex k = 0; k < c.frame_count(); ++k) w.step(c.timestep);
  const auto p = conservative_params();
  for (std::size_t i = 1; i < w.agents().size(); ++i) {
    const auto& f = w.agents()[i];
    const double gap = w.agents()[i - 1].position - f.position - c.vehicle_length;
    const double s_star = desired_gap(p, f.speed, 0.0);
    const double ratio = f.speed / 25.0;
    const double exact = s_star / std::sqrt(1.0 - ratio * ratio * ratio * ratio);
    CHECK(std::abs(f.speed - 10.0) < 1e-3);
    CHECK(std::abs(gap - exact) <= 1e-3 * exact);
    CHECK(std::abs(gap - s_star) <= 0.02 * s_star);
  }
  CHECK(w.collisions().empty());
}

TEST_CASE("determinism") {
  ScenarioConfig c;
  c.duration = 20;
  c.seed = 7;
  for (int k = 0; k < 6; ++k) {
    c.agents.push_back(spawn("v" + std::to_string(k), k % 3, 50.0 * k, 25, std::nullopt,
                             k == 0 ? DriverClass::kAggressive : DriverClass::kConservative, true));
  }
  const auto a = csv_of(run_scenario(c));
  const auto b = csv_of(run_scenario(c));
  CHECK(a == b);
  c.seed = 8;
  CHECK(csv_of(run_scenario(c)) != a);
}

TEST_CASE("zero duration gives an empty table") {
  ScenarioConfig c;
  c.duration = 0;
  c.agents = {spawn("a", 0, 0, 25)};
  const auto r = run_scenario(c);
  CHECK(r.table.empty());
  CHECK(r.labels.empty());
}

TEST_CASE("conservative desired speeds are drawn within ten percent") {
  ScenarioConfig c;
  for (int k = 0; k < 50; ++k) c.agents.push_back(spawn("v" + std::to_string(k), 0, 10.0 * k, 20));
  World w(c);
  for (const auto& a : w.agents()) {
    CHECK(a.params.desired_speed >= 22.5);
    CHECK(a.params.desired_speed <= 27.5);
  }
}

TEST_CASE("aggressive agent behind conservatives produces overtaking labels") {
  ScenarioConfig c;
  c.duration = 40;
  c.seed = 1;
  c.agents = {spawn("fast", 1, 0, 30, std::nullopt, DriverClass::kAggressive, true),
              spawn("c1", 1, 60, 22, 22.0, DriverClass::kConservative, false),
              spawn("c2", 1, 150, 22, 22.0, DriverClass::kConservative, false)};
  const auto r = run_scenario(c);
  std::size_t overtakes = 0;
  for (const auto& l : r.labels) {
    if (l.agent_id == "fast" && l.style == ManeuverStyle::kOvertaking) {
      ++overtakes;
      CHECK(l.start_frame < l.end_frame);
    }
  }
  CHECK(overtakes >= 1);
  CHECK(r.collisions.empty());
}

TEST_CASE("scripted weaving alternates lanes and echoes its label") {
  ScenarioConfig c;
  c.duration = 20;
  c.agents = {spawn("w", 1, 0, 25, 25.0)};
  c.maneuvers = {{"w", ManeuverStyle::kWeaving, 20, 140, 1, std::nullopt}};
  const auto r = run_scenario(c);
  REQUIRE(r.labels.size() == 1);
  CHECK(r.labels[0] == GroundTruthLabel{"w", ManeuverStyle::kWeaving, 20, 140});
  auto y = [&](FrameIndex f) { return r.table.at(f)[0].position.y; };
  CHECK(y(20) == 4.0);
  CHECK(y(50) == doctest::Approx(8.0));
  CHECK(y(80) == doctest::Approx(4.0));
  CHECK(y(110) == doctest::Approx(8.0));
  CHECK(y(140) == doctest::Approx(4.0));
  CHECK(y(35) == doctest::Approx(6.0));
}

TEST_CASE("scripted overspeeding raises the desired speed only inside the interval") {
  ScenarioConfig c;
  c.duration = 30;
  c.agents = {spawn("o", 0, 0, 25, 25.0, DriverClass::kAggressive)};
  c.maneuvers = {{"o", ManeuverStyle::kOverspeeding, 50, 150, 1, 35.0}};
  const auto r = run_scenario(c);
  CHECK(r.table.at(50)[0].velocity.x == doctest::Approx(25.0));
  CHECK(r.table.at(150)[0].velocity.x > 33.0);
  CHECK(r.table.at(299)[0].velocity.x < 26.0);
}

TEST_CASE("collisions are logged, not fatal") {
  ScenarioConfig c;
  c.lanes = 1;
  c.duration = 5;
  c.agents = {spawn("back", 0, 0, 30, 30.0), spawn("front", 0, 3, 0, 0.1)};
  const auto r = run_scenario(c);
  REQUIRE_FALSE(r.collisions.empty());
  CHECK(r.collisions[0].frame == 0);
  CHECK(r.collisions[0].follower == "back");
  CHECK(r.table.frames().size() == 50);
}

TEST_CASE("scenario JSON") {
  const auto doc = nlohmann::json::parse(R"({
    "name": "demo", "lanes": 2, "duration": 12, "seed": 4,
    "agents": [{"id": "a", "class": "aggressive", "lane": 1, "position": 10, "speed": 20},
               {"id": "b", "lane": 0, "position": 0, "speed": 20, "desired_speed": 24, "mobil": false}],
    "maneuvers": [{"agent": "b", "style": "SLC", "start_frame": 10, "end_frame": 40}]
  })");
  const auto c = scenario_from_json(doc);
  CHECK(c.name == "demo");
  CHECK(c.agents[0].driver_class == DriverClass::kAggressive);
  CHECK(c.agents[1].desired_speed == 24.0);
  CHECK_FALSE(c.agents[1].mobil);
  CHECK(c.maneuvers[0].style == ManeuverStyle::kSuddenLaneChange);
  const auto again = scenario_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));

  auto bad = doc;
  bad["maneuvers"][0]["end_frame"] = 500;
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = doc;
  bad["agents"][1]["id"] = "a";
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = doc;
  bad["agents"][0]["lane"] = 5;
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = doc;
  bad["timestep"] = 0;
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = doc;
  bad["maneuvers"][0]["style"] = "tailgating";
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  std::istringstream broken("{ not json");
  CHECK_THROWS_AS(load_scenario(broken), ValidationError);
}
