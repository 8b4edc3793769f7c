#include <doctest.h>

#include <cmath>
#include <sstream>

#include "drivestyle/errors.hpp"
#include "drivestyle/trajectory.hpp"

using namespace drivestyle;

namespace {
TrajectoryTable parse(const std::string& text, double rate) {
  std::istringstream in(text);
  return parse_trajectories(in, rate);
}
}  // namespace

TEST_CASE("finite-difference velocity for two samples") {
  const auto t = parse("timestamp,agent_id,agent_type,x,y\n0.0,a,car,0,0\n0.5,a,car,5,0\n", 2.0);
  REQUIRE(t.frames().size() == 2);
  CHECK(t.first_frame() == 0);
  CHECK(t.last_frame() == 1);
  for (FrameIndex f : {0, 1}) {
    const auto row = t.at(f);
    REQUIRE(row.size() == 1);
    CHECK(row[0].velocity.x == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(row[0].velocity.y == 0.0);
  }
}

TEST_CASE("velocity columns pass through") {
  const auto t = parse("timestamp,agent_id,agent_type,x,y,vx,vy\n1.0,a,bus,3,4,1.5,-2\n", 10.0);
  REQUIRE(t.frames().size() == 1);
  const auto& a = t.at(10)[0];
  CHECK(a.agent_type == AgentType::kBus);
  CHECK(a.velocity == Vec2{1.5, -2.0});
  CHECK(t.agent_count_max() == 1);
}

TEST_CASE("duplicate timestamp for one agent is rejected") {
  CHECK_THROWS_AS(parse("timestamp,agent_id,agent_type,x,y\n0,a,car,0,0\n0,a,car,1,0\n", 10.0),
                  ValidationError);
}

TEST_CASE("malformed input") {
  SUBCASE("empty stream") { CHECK_THROWS_AS(parse("", 10.0), ValidationError); }
  SUBCASE("bad number carries the line") {
    try {
      parse("timestamp,agent_id,agent_type,x,y\n0,a,car,0,0\n0.1,a,car,zz,0\n", 10.0);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("unknown agent type") {
    CHECK_THROWS_AS(parse("timestamp,agent_id,agent_type,x,y\n0,a,tank,0,0\n", 10.0), ParseError);
  }
  SUBCASE("decreasing timestamps") {
    CHECK_THROWS_AS(parse("timestamp,agent_id,agent_type,x,y\n0.2,a,car,0,0\n0.1,a,car,1,0\n", 10.0),
                    ValidationError);
  }
  SUBCASE("reappearance after a gap") {
    CHECK_THROWS_AS(parse("timestamp,agent_id,agent_type,x,y\n0,a,car,0,0\n0.1,a,car,1,0\n"
                          "0.3,a,car,3,0\n", 10.0),
                    ValidationError);
  }
  SUBCASE("non-positive rate") {
    CHECK_THROWS_AS(parse("timestamp,agent_id,agent_type,x,y\n0,a,car,0,0\n", 0.0),
                    ValidationError);
  }
}

TEST_CASE("comments, extra columns and column order") {
  const auto t = parse(
      "# recorded on a test track\n"
      "agent_id,location,x,y,timestamp,agent_type\n"
      "a,north,1,2,0,car\n"
      "# mid-file comment\n"
      "a,north,2,2,0.1,car\n",
      10.0);
  REQUIRE(t.frames().size() == 2);
  CHECK(t.at(1)[0].position == Vec2{2.0, 2.0});
}

TEST_CASE("round trip") {
  const std::string text =
      "timestamp,agent_id,agent_type,x,y\n"
      "0,a,car,0.1,0.2\n0,b,two_wheeler,10.3333333333,4\n"
      "0.1,a,car,1.7,0.2\n0.1,b,two_wheeler,11,4.5\n0.2,b,two_wheeler,12.25,5\n";
  const auto t = parse(text, 10.0);
  std::ostringstream out;
  write_trajectories(out, t);
  const auto again = parse(out.str(), 10.0);
  CHECK(again == t);
  std::ostringstream out2;
  write_trajectories(out2, again);
  CHECK(out2.str() == out.str());
}

TEST_CASE("derived speeds on linear motion equal displacement times rate") {
  std::ostringstream text;
  text << "timestamp,agent_id,agent_type,x,y\n";
  const double rate = 10.0;
  for (int k = 0; k < 20; ++k) {
    text << format_number(k / rate) << ",a,car," << format_number(3.0 * k) << ","
         << format_number(-4.0 * k) << "\n";
  }
  const auto t = parse(text.str(), rate);
  for (FrameIndex f = 1; f < 19; ++f) {
    const auto& prev = t.at(f - 1)[0];
    const auto& cur = t.at(f)[0];
    const double expected = std::sqrt(squared_distance(prev.position, cur.position)) * rate;
    CHECK(std::abs(cur.speed() - expected) <= 1e-9);
  }
}

TEST_CASE("frame index uses floor of timestamp times rate") {
  CHECK(frame_index_for(0.3, 10.0) == 3);
  CHECK(frame_index_for(0.29, 10.0) == 2);
  CHECK(frame_index_for(1.0 / 3.0, 30.0) == 10);
}

TEST_CASE("agent type names") {
  for (auto t : {AgentType::kCar, AgentType::kBus, AgentType::kTruck, AgentType::kTwoWheeler,
                 AgentType::kThreeWheeler, AgentType::kPedestrian, AgentType::kOther}) {
    CHECK(agent_type_from_string(to_string(t)) == t);
  }
  CHECK_FALSE(agent_type_from_string("spaceship").has_value());
}
