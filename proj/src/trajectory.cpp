#include "drivestyle/trajectory.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {

constexpr std::string_view kModule = "trajectory_ingest";

// Absorbs representation error of timestamps written as k / rate.
constexpr double kFrameSnap = 1e-9;

constexpr std::array<std::pair<AgentType, std::string_view>, 7> kTypeNames{{
    {AgentType::kCar, "car"},
    {AgentType::kBus, "bus"},
    {AgentType::kTruck, "truck"},
    {AgentType::kTwoWheeler, "two_wheeler"},
    {AgentType::kThreeWheeler, "three_wheeler"},
    {AgentType::kPedestrian, "pedestrian"},
    {AgentType::kOther, "other"},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(kModule), line,
                     "column '" + std::string(column) + "': not a number: '" +
                         std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(std::string(kModule), line,
                     "column '" + std::string(column) + "': non-finite value");
  }
  return value;
}

struct Sample {
  double timestamp;
  AgentType type;
  Vec2 position;
  std::optional<Vec2> velocity;
  std::size_t line;
};

struct Columns {
  std::optional<std::size_t> timestamp, agent_id, agent_type, x, y, vx, vy;
  std::size_t width = 0;
};

Columns locate_columns(std::string_view header, std::size_t line) {
  Columns cols;
  const auto names = split_fields(header);
  cols.width = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto name = names[i];
    auto assign = [&](std::optional<std::size_t>& slot) {
      if (slot) {
        throw ParseError(std::string(kModule), line,
                         "duplicate header column '" + std::string(name) + "'");
      }
      slot = i;
    };
    if (name == "timestamp") assign(cols.timestamp);
    else if (name == "agent_id") assign(cols.agent_id);
    else if (name == "agent_type") assign(cols.agent_type);
    else if (name == "x") assign(cols.x);
    else if (name == "y") assign(cols.y);
    else if (name == "vx") assign(cols.vx);
    else if (name == "vy") assign(cols.vy);
  }
  if (!cols.timestamp || !cols.agent_id || !cols.agent_type || !cols.x || !cols.y) {
    throw ParseError(std::string(kModule), line,
                     "header must contain timestamp,agent_id,agent_type,x,y");
  }
  if (cols.vx.has_value() != cols.vy.has_value()) {
    throw ParseError(std::string(kModule), line, "vx and vy must appear together");
  }
  return cols;
}

}  // namespace

double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

std::string_view to_string(AgentType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return name;
  }
  return "other";
}

std::optional<AgentType> agent_type_from_string(std::string_view name) {
  for (const auto& [t, n] : kTypeNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

FrameIndex frame_index_for(double timestamp, double frame_rate_hz) {
  return static_cast<FrameIndex>(std::floor(timestamp * frame_rate_hz + kFrameSnap));
}

TrajectoryTable::TrajectoryTable(FrameMap frames, double frame_rate_hz)
    : frames_(std::move(frames)), frame_rate_hz_(frame_rate_hz) {
  if (!(frame_rate_hz_ > 0.0) || !std::isfinite(frame_rate_hz_)) {
    throw ValidationError(std::string(kModule), "frame_rate_hz must be positive");
  }
  std::set<std::string> ids;
  for (const auto& [frame, agents] : frames_) {
    for (const auto& a : agents) ids.insert(a.agent_id);
  }
  agent_count_max_ = ids.size();
}

FrameIndex TrajectoryTable::first_frame() const {
  if (frames_.empty()) throw LookupError(std::string(kModule), "empty trajectory table");
  return frames_.begin()->first;
}

FrameIndex TrajectoryTable::last_frame() const {
  if (frames_.empty()) throw LookupError(std::string(kModule), "empty trajectory table");
  return frames_.rbegin()->first;
}

std::span<const AgentFrame> TrajectoryTable::at(FrameIndex frame) const {
  const auto it = frames_.find(frame);
  if (it == frames_.end()) return {};
  return it->second;
}

TrajectoryTable parse_trajectories(std::istream& source, double frame_rate_hz) {
  if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
    throw ValidationError(std::string(kModule), "frame_rate_hz must be positive");
  }

  std::optional<Columns> cols;
  // Agent order of first appearance keeps output deterministic.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Sample>> samples;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(source, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!cols) {
      cols = locate_columns(line, line_no);
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() < cols->width) {
      throw ParseError(std::string(kModule), line_no,
                       "expected " + std::to_string(cols->width) + " fields, got " +
                           std::to_string(fields.size()));
    }
    Sample s{};
    s.line = line_no;
    s.timestamp = parse_double(fields[*cols->timestamp], line_no, "timestamp");
    if (s.timestamp < 0.0) {
      throw ParseError(std::string(kModule), line_no, "negative timestamp");
    }
    const std::string id(fields[*cols->agent_id]);
    if (id.empty()) throw ParseError(std::string(kModule), line_no, "empty agent_id");
    const auto type = agent_type_from_string(fields[*cols->agent_type]);
    if (!type) {
      throw ParseError(std::string(kModule), line_no,
                       "unknown agent_type '" + std::string(fields[*cols->agent_type]) + "'");
    }
    s.type = *type;
    s.position = {parse_double(fields[*cols->x], line_no, "x"),
                  parse_double(fields[*cols->y], line_no, "y")};
    if (cols->vx) {
      const auto vx = fields[*cols->vx];
      const auto vy = fields[*cols->vy];
      if (!vx.empty() || !vy.empty()) {
        s.velocity = Vec2{parse_double(vx, line_no, "vx"), parse_double(vy, line_no, "vy")};
      }
    }
    auto [it, inserted] = samples.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(s);
  }

  if (samples.empty()) {
    throw ValidationError(std::string(kModule), "trajectory stream contains no records");
  }

  TrajectoryTable::FrameMap frames;
  for (const auto& id : order) {
    auto& run = samples.at(id);
    for (std::size_t k = 1; k < run.size(); ++k) {
      if (!(run[k].timestamp > run[k - 1].timestamp)) {
        throw ValidationError(std::string(kModule),
                              "line " + std::to_string(run[k].line) + ": agent '" + id +
                                  "' timestamps must strictly increase");
      }
    }
    std::vector<FrameIndex> indices(run.size());
    for (std::size_t k = 0; k < run.size(); ++k) {
      indices[k] = frame_index_for(run[k].timestamp, frame_rate_hz);
      if (k > 0 && indices[k] == indices[k - 1]) {
        throw ValidationError(std::string(kModule),
                              "line " + std::to_string(run[k].line) + ": agent '" + id +
                                  "' has two samples in frame " + std::to_string(indices[k]));
      }
      if (k > 0 && indices[k] != indices[k - 1] + 1) {
        throw ValidationError(std::string(kModule),
                              "line " + std::to_string(run[k].line) + ": agent '" + id +
                                  "' reappears after leaving at frame " +
                                  std::to_string(indices[k - 1]));
      }
    }
    for (std::size_t k = 0; k < run.size(); ++k) {
      Vec2 velocity{};
      if (run[k].velocity) {
        velocity = *run[k].velocity;
      } else if (run.size() > 1) {
        const std::size_t a = (k + 1 < run.size()) ? k : k - 1;
        const std::size_t b = a + 1;
        const double dt = run[b].timestamp - run[a].timestamp;
        velocity = {(run[b].position.x - run[a].position.x) / dt,
                    (run[b].position.y - run[a].position.y) / dt};
      }
      frames[indices[k]].push_back(
          AgentFrame{run[k].timestamp, id, run[k].type, run[k].position, velocity});
    }
  }

  // Within a frame, keep the order in which agents first appeared.
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  for (auto& [frame, agents] : frames) {
    std::sort(agents.begin(), agents.end(), [&](const AgentFrame& a, const AgentFrame& b) {
      return rank.at(a.agent_id) < rank.at(b.agent_id);
    });
  }
  return TrajectoryTable(std::move(frames), frame_rate_hz);
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_trajectories(std::ostream& out, const TrajectoryTable& table) {
  out << "timestamp,agent_id,agent_type,x,y,vx,vy\n";
  for (const auto& [frame, agents] : table.frames()) {
    for (const auto& a : agents) {
      out << format_number(a.timestamp) << ',' << a.agent_id << ',' << to_string(a.agent_type)
          << ',' << format_number(a.position.x) << ',' << format_number(a.position.y) << ','
          << format_number(a.velocity.x) << ',' << format_number(a.velocity.y) << '\n';
    }
  }
}

}  // namespace drivestyle
