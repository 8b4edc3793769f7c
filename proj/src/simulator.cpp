#include "drivestyle/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <set>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {

constexpr const char* kModule = "simulator";

// Emergent overtakes not completed within this horizon are dropped.
constexpr double kOvertakeHorizonS = 30.0;

template <typename T>
void read_if_present(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, std::string("key '") + key + "': " + e.what());
  }
}

DriverClass class_from_string(const std::string& s) {
  if (s == "conservative") return DriverClass::kConservative;
  if (s == "aggressive") return DriverClass::kAggressive;
  throw ValidationError(kModule, "unknown driver class '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(kModule, what);
}

}  // namespace

std::string_view to_string(DriverClass c) {
  return c == DriverClass::kAggressive ? "aggressive" : "conservative";
}

void DriverParams::validate() const {
  require(desired_speed > 0.0 && time_gap > 0.0 && min_gap > 0.0 && max_accel > 0.0 &&
              comfort_decel > 0.0 && safe_decel > 0.0,
          "driver parameters must be positive");
  require(politeness >= 0.0 && politeness <= 1.0, "politeness must lie in [0, 1]");
  require(accel_threshold >= 0.0, "accel_threshold must be non-negative");
}

DriverParams conservative_params() {
  return {25.0, 1.5, 5.0, 3.0, 6.0, 0.5, 0.2, 3.0};
}

DriverParams aggressive_params() {
  return {40.0, 1.2, 2.5, 6.0, 9.0, 0.0, 0.0, 9.0};
}

DriverParams params_for(DriverClass c) {
  return c == DriverClass::kAggressive ? aggressive_params() : conservative_params();
}

double desired_gap(const DriverParams& p, double speed, double approach_rate) {
  const double dynamic =
      speed * p.time_gap + speed * approach_rate / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  return p.min_gap + std::max(0.0, dynamic);
}

double idm_acceleration(const DriverParams& p, double speed,
                        const std::optional<LeaderState>& leader) {
  const double ratio = speed / p.desired_speed;
  const double free_term = 1.0 - ratio * ratio * ratio * ratio;
  if (!leader) return p.max_accel * free_term;
  if (leader->gap <= 0.0) return -p.comfort_decel;
  const double s_star = desired_gap(p, speed, speed - leader->speed);
  const double q = s_star / leader->gap;
  return p.max_accel * (free_term - q * q);
}

double idm_acceleration(const SimAgent& ego, const SimAgent* leader, double vehicle_length) {
  std::optional<LeaderState> state;
  if (leader) state = LeaderState{leader->position - ego.position - vehicle_length, leader->speed};
  return idm_acceleration(ego.params, ego.speed, state);
}

double mobil_incentive(const MobilAccelerations& a, double politeness) {
  return (a.ego_after - a.ego) +
         politeness * ((a.new_follower_after - a.new_follower) +
                       (a.old_follower_after - a.old_follower));
}

MobilDecision mobil_decision(const MobilScene& s, double length) {
  const SimAgent* cur_leader = s.current_leader ? &*s.current_leader : nullptr;
  const SimAgent* tgt_leader = s.target_leader ? &*s.target_leader : nullptr;

  MobilDecision d;
  auto& a = d.accelerations;
  a.ego = idm_acceleration(s.ego, cur_leader, length);
  a.ego_after = idm_acceleration(s.ego, tgt_leader, length);
  if (s.target_follower) {
    a.new_follower = idm_acceleration(*s.target_follower, tgt_leader, length);
    a.new_follower_after = idm_acceleration(*s.target_follower, &s.ego, length);
  }
  if (s.current_follower) {
    a.old_follower = idm_acceleration(*s.current_follower, &s.ego, length);
    a.old_follower_after = idm_acceleration(*s.current_follower, cur_leader, length);
  }

  bool gaps_ok = true;
  if (tgt_leader) gaps_ok = gaps_ok && (tgt_leader->position - s.ego.position - length > 0.0);
  if (s.target_follower) {
    gaps_ok = gaps_ok && (s.ego.position - s.target_follower->position - length > 0.0);
  }
  d.safe = gaps_ok && (!s.target_follower || a.new_follower_after >= -s.ego.params.safe_decel);
  d.incentive = mobil_incentive(a, s.ego.params.politeness);
  d.approved = d.safe && d.incentive > s.ego.params.accel_threshold;
  return d;
}

FrameIndex ScenarioConfig::frame_count() const {
  return static_cast<FrameIndex>(std::llround(duration / timestep));
}

FrameIndex ScenarioConfig::lane_change_frames() const {
  return std::max<FrameIndex>(1, std::llround(lane_change_duration / timestep));
}

void ScenarioConfig::validate() const {
  require(timestep > 0.0 && std::isfinite(timestep), "timestep must be positive");
  require(duration >= 0.0 && std::isfinite(duration), "duration must be non-negative");
  require(lanes >= 1, "lanes must be at least 1");
  require(lane_width > 0.0, "lane_width must be positive");
  require(road_length > 0.0, "road_length must be positive");
  require(vehicle_length > 0.0, "vehicle_length must be positive");
  require(lane_change_duration > 0.0, "lane_change_duration must be positive");
  require(mobil_period > 0.0, "mobil_period must be positive");
  require(speed_variation >= 0.0 && speed_variation < 1.0, "speed_variation must lie in [0, 1)");
  std::set<std::string> ids;
  for (const auto& a : agents) {
    require(!a.id.empty(), "agent id must not be empty");
    require(ids.insert(a.id).second, "duplicate agent id '" + a.id + "'");
    require(a.lane >= 0 && a.lane < lanes, "agent '" + a.id + "' lane out of range");
    require(a.position >= 0.0 && a.position <= road_length,
            "agent '" + a.id + "' position off the road");
    require(a.speed >= 0.0, "agent '" + a.id + "' speed must be non-negative");
    require(!a.desired_speed || *a.desired_speed > 0.0,
            "agent '" + a.id + "' desired_speed must be positive");
  }
  const auto frames = frame_count();
  const auto lcf = lane_change_frames();
  for (const auto& m : maneuvers) {
    require(ids.contains(m.agent_id), "maneuver for unknown agent '" + m.agent_id + "'");
    require(m.start_frame >= 0 && m.start_frame <= m.end_frame && m.end_frame < frames,
            "maneuver frames for '" + m.agent_id + "' must satisfy 0 <= start <= end < " +
                std::to_string(frames));
    require(m.direction == 1 || m.direction == -1, "maneuver direction must be +1 or -1");
    if (m.style == ManeuverStyle::kOvertaking || m.style == ManeuverStyle::kWeaving) {
      require(m.end_frame - m.start_frame >= 2 * lcf,
              "overtaking/weaving maneuver must span two lane changes");
    }
    if (m.style != ManeuverStyle::kOverspeeding) {
      require(lanes >= 2, "lateral maneuvers need at least two lanes");
    }
    require(!m.speed || *m.speed > 0.0, "maneuver speed must be positive");
  }
}

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  require(doc.is_object(), "scenario must be a JSON object");
  ScenarioConfig c;
  read_if_present(doc, "name", c.name);
  read_if_present(doc, "lanes", c.lanes);
  read_if_present(doc, "lane_width", c.lane_width);
  read_if_present(doc, "road_length", c.road_length);
  read_if_present(doc, "timestep", c.timestep);
  read_if_present(doc, "duration", c.duration);
  read_if_present(doc, "vehicle_length", c.vehicle_length);
  read_if_present(doc, "lane_change_duration", c.lane_change_duration);
  read_if_present(doc, "mobil_period", c.mobil_period);
  read_if_present(doc, "speed_variation", c.speed_variation);
  read_if_present(doc, "emergent_labels", c.emergent_labels);
  read_if_present(doc, "seed", c.seed);
  if (doc.contains("agents")) {
    for (const auto& j : doc.at("agents")) {
      AgentSpawn a;
      std::string cls = "conservative";
      read_if_present(j, "id", a.id);
      read_if_present(j, "class", cls);
      a.driver_class = class_from_string(cls);
      read_if_present(j, "lane", a.lane);
      read_if_present(j, "position", a.position);
      read_if_present(j, "speed", a.speed);
      if (j.contains("desired_speed")) {
        double v = 0.0;
        read_if_present(j, "desired_speed", v);
        a.desired_speed = v;
      }
      read_if_present(j, "mobil", a.mobil);
      c.agents.push_back(std::move(a));
    }
  }
  if (doc.contains("maneuvers")) {
    for (const auto& j : doc.at("maneuvers")) {
      ScriptedManeuver m;
      std::string style;
      read_if_present(j, "agent", m.agent_id);
      read_if_present(j, "style", style);
      const auto s = maneuver_style_from_string(style);
      require(s.has_value(), "unknown maneuver style '" + style + "'");
      m.style = *s;
      read_if_present(j, "start_frame", m.start_frame);
      read_if_present(j, "end_frame", m.end_frame);
      read_if_present(j, "direction", m.direction);
      if (j.contains("speed")) {
        double v = 0.0;
        read_if_present(j, "speed", v);
        m.speed = v;
      }
      c.maneuvers.push_back(std::move(m));
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : c.agents) {
    nlohmann::json j = {{"id", a.id},
                        {"class", std::string(to_string(a.driver_class))},
                        {"lane", a.lane},
                        {"position", a.position},
                        {"speed", a.speed},
                        {"mobil", a.mobil}};
    if (a.desired_speed) j["desired_speed"] = *a.desired_speed;
    agents.push_back(std::move(j));
  }
  nlohmann::json maneuvers = nlohmann::json::array();
  for (const auto& m : c.maneuvers) {
    nlohmann::json j = {{"agent", m.agent_id},
                        {"style", std::string(to_string(m.style))},
                        {"start_frame", m.start_frame},
                        {"end_frame", m.end_frame},
                        {"direction", m.direction}};
    if (m.speed) j["speed"] = *m.speed;
    maneuvers.push_back(std::move(j));
  }
  return {{"name", c.name},
          {"lanes", c.lanes},
          {"lane_width", c.lane_width},
          {"road_length", c.road_length},
          {"timestep", c.timestep},
          {"duration", c.duration},
          {"vehicle_length", c.vehicle_length},
          {"lane_change_duration", c.lane_change_duration},
          {"mobil_period", c.mobil_period},
          {"speed_variation", c.speed_variation},
          {"emergent_labels", c.emergent_labels},
          {"seed", c.seed},
          {"agents", std::move(agents)},
          {"maneuvers", std::move(maneuvers)}};
}

ScenarioConfig load_scenario(std::istream& in, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(kModule, origin + ": " + e.what());
  }
  return scenario_from_json(doc);
}

World::World(ScenarioConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  std::uniform_real_distribution<double> variation(1.0 - config_.speed_variation,
                                                   1.0 + config_.speed_variation);
  for (const auto& spawn : config_.agents) {
    SimAgent a;
    a.id = spawn.id;
    a.lane = spawn.lane;
    a.position = spawn.position;
    a.speed = spawn.speed;
    a.driver_class = spawn.driver_class;
    a.params = params_for(spawn.driver_class);
    // Draw for every conservative agent so overrides do not shift the stream.
    const double factor =
        spawn.driver_class == DriverClass::kConservative ? variation(rng_) : 1.0;
    a.params.desired_speed =
        spawn.desired_speed ? *spawn.desired_speed : a.params.desired_speed * factor;
    a.mobil_enabled = spawn.mobil;
    agents_.push_back(std::move(a));
  }
}

double World::lateral_position(const SimAgent& a) const {
  if (!a.lane_change) return a.lane * config_.lane_width;
  const double from = a.lane_change->from_lane * config_.lane_width;
  const double to = a.lane_change->target_lane * config_.lane_width;
  const double blend = 0.5 * (1.0 - std::cos(std::numbers::pi * a.lane_change->progress));
  return from + (to - from) * blend;
}

double World::lateral_velocity(const SimAgent& a) const {
  if (!a.lane_change) return 0.0;
  const double span = (a.lane_change->target_lane - a.lane_change->from_lane) * config_.lane_width;
  return span * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * a.lane_change->progress) /
         config_.lane_change_duration;
}

std::vector<AgentFrame> World::snapshot() const {
  std::vector<AgentFrame> out;
  out.reserve(agents_.size());
  const double t = static_cast<double>(frame_) / config_.frame_rate_hz();
  for (const auto& a : agents_) {
    out.push_back({t, a.id, AgentType::kCar, {a.position, lateral_position(a)},
                   {a.speed, lateral_velocity(a)}});
  }
  return out;
}

const SimAgent* World::leader_of(std::size_t index, int lane) const {
  const SimAgent& ego = agents_[index];
  const SimAgent* best = nullptr;
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j == index || agents_[j].lane != lane) continue;
    const auto& o = agents_[j];
    const bool ahead = o.position > ego.position || (o.position == ego.position && j > index);
    if (ahead && (!best || o.position < best->position)) best = &o;
  }
  return best;
}

const SimAgent* World::follower_of(std::size_t index, int lane) const {
  const SimAgent& ego = agents_[index];
  const SimAgent* best = nullptr;
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    if (j == index || agents_[j].lane != lane) continue;
    const auto& o = agents_[j];
    const bool behind = o.position < ego.position || (o.position == ego.position && j < index);
    if (behind && (!best || o.position > best->position)) best = &o;
  }
  return best;
}

double World::effective_desired_speed(const SimAgent& agent) const {
  for (const auto& m : config_.maneuvers) {
    if (m.style == ManeuverStyle::kOverspeeding && m.agent_id == agent.id &&
        frame_ >= m.start_frame && frame_ <= m.end_frame) {
      return m.speed.value_or(aggressive_params().desired_speed);
    }
  }
  return agent.params.desired_speed;
}

bool World::scripted_now(const SimAgent& agent) const {
  const auto lcf = config_.lane_change_frames();
  for (const auto& m : config_.maneuvers) {
    if (m.agent_id == agent.id && m.style != ManeuverStyle::kOverspeeding &&
        frame_ >= m.start_frame - lcf && frame_ <= m.end_frame) {
      return true;
    }
  }
  return false;
}

void World::start_lane_change(SimAgent& agent, int target_lane) {
  agent.lane_change = LaneChange{agent.lane, target_lane, 0.0, frame_};
  agent.lane = target_lane;
}

void World::apply_scripts() {
  const auto lcf = config_.lane_change_frames();
  for (const auto& m : config_.maneuvers) {
    if (m.style == ManeuverStyle::kOverspeeding) continue;
    // Lateral moves as (frame, offset relative to the maneuver direction).
    std::vector<std::pair<FrameIndex, int>> moves;
    if (m.style == ManeuverStyle::kSuddenLaneChange) {
      moves.emplace_back(m.start_frame, 1);
    } else if (m.style == ManeuverStyle::kOvertaking) {
      moves.emplace_back(m.start_frame, 1);
      moves.emplace_back(m.end_frame - lcf, -1);
    } else {
      int sign = 1;
      for (FrameIndex f = m.start_frame; f + lcf <= m.end_frame; f += lcf, sign = -sign) {
        moves.emplace_back(f, sign);
      }
    }
    for (const auto& [when, sign] : moves) {
      if (when != frame_) continue;
      auto it = std::find_if(agents_.begin(), agents_.end(),
                             [&](const SimAgent& a) { return a.id == m.agent_id; });
      if (it == agents_.end()) continue;  // already left the road
      int target = it->lane + sign * m.direction;
      if (target < 0 || target >= config_.lanes) target = it->lane - sign * m.direction;
      if (target < 0 || target >= config_.lanes) continue;
      start_lane_change(*it, target);
    }
  }
}

void World::run_mobil() {
  const auto period = std::max<FrameIndex>(1, std::llround(config_.mobil_period / config_.timestep));
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& ego = agents_[i];
    if ((frame_ + static_cast<FrameIndex>(i)) % period != 0) continue;
    if (!ego.mobil_enabled || ego.lane_change || scripted_now(ego)) continue;

    auto with_speed = [&](const SimAgent* a) -> std::optional<SimAgent> {
      if (!a) return std::nullopt;
      SimAgent copy = *a;
      copy.params.desired_speed = effective_desired_speed(*a);
      return copy;
    };
    std::optional<MobilDecision> best;
    int best_lane = ego.lane;
    const SimAgent* best_leader = nullptr;
    for (const int dir : {-1, 1}) {
      const int target = ego.lane + dir;
      if (target < 0 || target >= config_.lanes) continue;
      MobilScene scene;
      scene.ego = *with_speed(&ego);
      scene.current_leader = with_speed(leader_of(i, ego.lane));
      scene.current_follower = with_speed(follower_of(i, ego.lane));
      scene.target_leader = with_speed(leader_of(i, target));
      scene.target_follower = with_speed(follower_of(i, target));
      const auto d = mobil_decision(scene, config_.vehicle_length);
      if (d.approved && (!best || d.incentive > best->incentive)) {
        best = d;
        best_lane = target;
        best_leader = leader_of(i, ego.lane);
      }
    }
    if (!best) continue;
    if (!best->safe) {
      throw ContractViolation(kModule, "approved lane change violates the safety criterion");
    }
    approved_.push_back(*best);
    if (config_.emergent_labels && ego.driver_class == DriverClass::kAggressive && best_leader) {
      pending_.push_back({ego.id, best_leader->id, frame_});
    }
    start_lane_change(ego, best_lane);
  }
}

void World::resolve_overtakes() {
  const auto horizon = static_cast<FrameIndex>(std::llround(kOvertakeHorizonS / config_.timestep));
  std::vector<PendingOvertake> keep;
  for (const auto& p : pending_) {
    const auto find = [&](const std::string& id) -> const SimAgent* {
      for (const auto& a : agents_) {
        if (a.id == id) return &a;
      }
      return nullptr;
    };
    const auto* ego = find(p.agent_id);
    const auto* leader = find(p.leader_id);
    if (!ego || !leader || frame_ - p.start_frame > horizon) continue;
    if (ego->position > leader->position + config_.vehicle_length) {
      emergent_.push_back({p.agent_id, ManeuverStyle::kOvertaking, p.start_frame, frame_});
    } else {
      keep.push_back(p);
    }
  }
  pending_ = std::move(keep);
}

void World::step(double dt) {
  if (dt != config_.timestep) {
    throw ContractViolation(kModule, "step dt must equal the scenario timestep");
  }
  apply_scripts();
  run_mobil();

  std::vector<double> accel(agents_.size());
  std::vector<std::pair<std::string, std::string>> touching;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    SimAgent ego = agents_[i];
    ego.params.desired_speed = effective_desired_speed(agents_[i]);
    const SimAgent* leader = leader_of(i, ego.lane);
    if (leader && leader->position - ego.position - config_.vehicle_length <= 0.0) {
      touching.emplace_back(ego.id, leader->id);
      if (std::find(touching_.begin(), touching_.end(), touching.back()) == touching_.end()) {
        collisions_.push_back({frame_, ego.id, leader->id});
      }
    }
    accel[i] = idm_acceleration(ego, leader, config_.vehicle_length);
  }
  touching_ = std::move(touching);

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto& a = agents_[i];
    a.position += a.speed * dt;
    a.speed = std::max(0.0, a.speed + accel[i] * dt);
    if (a.lane_change) {
      a.lane_change->progress += dt / config_.lane_change_duration;
      if (a.lane_change->progress >= 1.0 - 1e-9) a.lane_change.reset();
    }
  }
  ++frame_;
  resolve_overtakes();
  std::erase_if(agents_, [&](const SimAgent& a) { return a.position > config_.road_length; });
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  World world(config);
  const auto frames = world.config().frame_count();
  TrajectoryTable::FrameMap table;
  for (FrameIndex k = 0; k < frames; ++k) {
    auto snap = world.snapshot();
    if (!snap.empty()) table.emplace(k, std::move(snap));
    if (k + 1 < frames) world.step(config.timestep);
  }
  ScenarioResult result;
  result.table = TrajectoryTable(std::move(table), config.frame_rate_hz());
  for (const auto& m : world.config().maneuvers) {
    result.labels.push_back({m.agent_id, m.style, m.start_frame, m.end_frame});
  }
  for (const auto& l : world.emergent_labels()) result.labels.push_back(l);
  std::stable_sort(result.labels.begin(), result.labels.end(),
                   [](const GroundTruthLabel& a, const GroundTruthLabel& b) {
                     return a.start_frame < b.start_frame;
                   });
  result.collisions = world.collisions();
  return result;
}

}  // namespace drivestyle
