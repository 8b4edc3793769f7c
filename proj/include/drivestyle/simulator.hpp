#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "drivestyle/evaluation.hpp"
#include "drivestyle/trajectory.hpp"

namespace drivestyle {

// IDM and MOBIL parameters of one driver.
struct DriverParams {
  double desired_speed = 25.0;   // v0, m/s
  double time_gap = 1.5;         // T, s
  double min_gap = 5.0;          // s0, m
  double max_accel = 3.0;        // a, m/s^2
  double comfort_decel = 6.0;    // b, m/s^2
  double politeness = 0.5;       // p
  double accel_threshold = 0.2;  // delta a_th, m/s^2
  double safe_decel = 3.0;       // b_safe, m/s^2

  void validate() const;
};

enum class DriverClass { kConservative, kAggressive };

std::string_view to_string(DriverClass c);

DriverParams conservative_params();
DriverParams aggressive_params();
DriverParams params_for(DriverClass c);

struct LaneChange {
  int from_lane = 0;
  int target_lane = 0;
  double progress = 0.0;  // [0, 1]
  FrameIndex start_frame = 0;
};

struct SimAgent {
  std::string id;
  int lane = 0;             // target lane while a lane change is in progress
  double position = 0.0;    // longitudinal, m
  double speed = 0.0;       // m/s
  DriverParams params;
  DriverClass driver_class = DriverClass::kConservative;
  std::optional<LaneChange> lane_change;
  bool mobil_enabled = true;
};

// Net bumper-to-bumper gap and speed of the vehicle ahead.
struct LeaderState {
  double gap = 0.0;
  double speed = 0.0;
};

// Desired dynamic gap s*(v, dv) = s0 + max(0, vT + v dv / (2 sqrt(ab))).
double desired_gap(const DriverParams& p, double speed, double approach_rate);

// Free-road term a[1 - (v/v0)^4] minus the interaction term a (s*/s)^2.
// A non-positive gap yields the emergency deceleration -b.
double idm_acceleration(const DriverParams& p, double speed,
                        const std::optional<LeaderState>& leader);
double idm_acceleration(const SimAgent& ego, const SimAgent* leader, double vehicle_length);

// Accelerations before (a) and after (tilde) a hypothetical lane change.
struct MobilAccelerations {
  double ego = 0.0, ego_after = 0.0;
  double new_follower = 0.0, new_follower_after = 0.0;
  double old_follower = 0.0, old_follower_after = 0.0;
};

double mobil_incentive(const MobilAccelerations& acc, double politeness);

// Neighborhood of the ego for one candidate target lane.
struct MobilScene {
  SimAgent ego;
  std::optional<SimAgent> current_leader;
  std::optional<SimAgent> current_follower;
  std::optional<SimAgent> target_leader;
  std::optional<SimAgent> target_follower;
};

struct MobilDecision {
  bool approved = false;
  bool safe = false;
  double incentive = 0.0;
  MobilAccelerations accelerations;
};

// Safety: the new follower's acceleration stays >= -b_safe and neither new gap
// is non-positive. Incentive: ego gain plus politeness-weighted neighbor gains
// exceeds delta a_th. Approved iff both hold.
MobilDecision mobil_decision(const MobilScene& scene, double vehicle_length);

struct AgentSpawn {
  std::string id;
  DriverClass driver_class = DriverClass::kConservative;
  int lane = 0;
  double position = 0.0;
  double speed = 0.0;
  std::optional<double> desired_speed;  // drawn from the class default when unset
  bool mobil = true;
};

struct ScriptedManeuver {
  std::string agent_id;
  ManeuverStyle style = ManeuverStyle::kSuddenLaneChange;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  int direction = 1;                   // lane offset of the first lateral move
  std::optional<double> speed;         // overspeeding target speed
};

struct ScenarioConfig {
  std::string name = "scenario";
  int lanes = 3;
  double lane_width = 4.0;
  double road_length = 5000.0;
  double timestep = 0.1;
  double duration = 30.0;
  double vehicle_length = 5.0;
  double lane_change_duration = 3.0;
  double mobil_period = 1.0;
  double speed_variation = 0.1;  // conservative v0 drawn in v0 * [1 - x, 1 + x]
  bool emergent_labels = true;
  std::uint64_t seed = 0;
  std::vector<AgentSpawn> agents;
  std::vector<ScriptedManeuver> maneuvers;

  FrameIndex frame_count() const;
  double frame_rate_hz() const { return 1.0 / timestep; }
  FrameIndex lane_change_frames() const;
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario(std::istream& in, const std::string& origin = "<stream>");

struct CollisionEvent {
  FrameIndex frame = 0;
  std::string follower;
  std::string leader;
};

// Deterministic highway world. One writer; step() advances one timestep.
class World {
 public:
  explicit World(ScenarioConfig config);

  // dt must equal the configured timestep.
  void step(double dt);

  FrameIndex frame() const { return frame_; }
  const ScenarioConfig& config() const { return config_; }
  const std::vector<SimAgent>& agents() const { return agents_; }
  const std::vector<CollisionEvent>& collisions() const { return collisions_; }
  const std::vector<GroundTruthLabel>& emergent_labels() const { return emergent_; }
  const std::vector<MobilDecision>& approved_decisions() const { return approved_; }

  double lateral_position(const SimAgent& agent) const;
  double lateral_velocity(const SimAgent& agent) const;
  std::vector<AgentFrame> snapshot() const;

 private:
  struct PendingOvertake {
    std::string agent_id;
    std::string leader_id;
    FrameIndex start_frame = 0;
  };

  const SimAgent* leader_of(std::size_t index, int lane) const;
  const SimAgent* follower_of(std::size_t index, int lane) const;
  double effective_desired_speed(const SimAgent& agent) const;
  bool scripted_now(const SimAgent& agent) const;
  void apply_scripts();
  void run_mobil();
  void start_lane_change(SimAgent& agent, int target_lane);
  void resolve_overtakes();

  ScenarioConfig config_;
  std::vector<SimAgent> agents_;
  std::mt19937_64 rng_;
  FrameIndex frame_ = 0;
  std::vector<CollisionEvent> collisions_;
  std::vector<std::pair<std::string, std::string>> touching_;
  std::vector<GroundTruthLabel> emergent_;
  std::vector<PendingOvertake> pending_;
  std::vector<MobilDecision> approved_;
};

struct ScenarioResult {
  TrajectoryTable table;
  std::vector<GroundTruthLabel> labels;
  std::vector<CollisionEvent> collisions;
};

// Records frame k (time k * timestep) for k in [0, frame_count) and returns
// the trajectories plus scripted and emergent ground truth.
ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace drivestyle
