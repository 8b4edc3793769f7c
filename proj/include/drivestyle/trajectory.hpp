#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drivestyle {

using FrameIndex = std::int64_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double squared_distance(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double norm(const Vec2& v);

enum class AgentType { kCar, kBus, kTruck, kTwoWheeler, kThreeWheeler, kPedestrian, kOther };

std::string_view to_string(AgentType type);
std::optional<AgentType> agent_type_from_string(std::string_view name);

struct AgentFrame {
  double timestamp = 0.0;  // seconds
  std::string agent_id;
  AgentType agent_type = AgentType::kCar;
  Vec2 position;  // meters, global frame
  Vec2 velocity;  // m/s

  double speed() const { return norm(velocity); }

  friend bool operator==(const AgentFrame&, const AgentFrame&) = default;
};

// Canonical in-memory trajectory table. Frames are keyed by
// floor(timestamp * frame_rate_hz); every agent occupies one contiguous run of
// frame indices. Immutable after construction.
class TrajectoryTable {
 public:
  using FrameMap = std::map<FrameIndex, std::vector<AgentFrame>>;

  TrajectoryTable() = default;
  TrajectoryTable(FrameMap frames, double frame_rate_hz);

  const FrameMap& frames() const { return frames_; }
  double frame_rate_hz() const { return frame_rate_hz_; }
  std::size_t agent_count_max() const { return agent_count_max_; }

  bool empty() const { return frames_.empty(); }
  FrameIndex first_frame() const;
  FrameIndex last_frame() const;

  // Agents present at `frame`; empty when the frame has no samples.
  std::span<const AgentFrame> at(FrameIndex frame) const;

  double frame_time(FrameIndex frame) const {
    return static_cast<double>(frame) / frame_rate_hz_;
  }

  friend bool operator==(const TrajectoryTable&, const TrajectoryTable&) = default;

 private:
  FrameMap frames_;
  double frame_rate_hz_ = 1.0;
  std::size_t agent_count_max_ = 0;
};

FrameIndex frame_index_for(double timestamp, double frame_rate_hz);

// Reads `timestamp,agent_id,agent_type,x,y[,vx,vy]` records. Columns are
// located by header name; unknown columns are ignored. Missing velocities are
// derived by forward difference (backward for an agent's last sample).
TrajectoryTable parse_trajectories(std::istream& source, double frame_rate_hz);

// Writes the table with velocity columns, using shortest round-trip number
// formatting so that parse(write(t)) == t.
void write_trajectories(std::ostream& out, const TrajectoryTable& table);

// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

}  // namespace drivestyle
