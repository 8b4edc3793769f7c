#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "drivestyle/traffic_graph.hpp"
#include "drivestyle/trajectory.hpp"

namespace drivestyle {

enum class CentralityKind { kCloseness, kDegree };

std::string_view to_string(CentralityKind kind);

// Inclusive range of frame indices.
struct FrameWindow {
  FrameIndex first = 0;
  FrameIndex last = 0;

  FrameIndex length() const { return last - first + 1; }
  bool contains(FrameIndex f) const { return f >= first && f <= last; }
};

struct CentralitySample {
  FrameIndex frame = 0;
  double value = 0.0;
};

struct CentralitySeries {
  std::string agent_id;
  CentralityKind kind = CentralityKind::kCloseness;
  std::vector<CentralitySample> values;  // ascending frames
  FrameWindow window;

  // Samples whose frame lies in `w`.
  CentralitySeries slice(const FrameWindow& w) const;
};

struct AgentSeries {
  CentralitySeries closeness;
  CentralitySeries degree;
};

using SeriesMap = std::map<std::string, AgentSeries>;

// (|C| - 1) / sum of shortest-path costs from the agent to the rest of its
// connected component C; 0 for an isolated agent. Throws LookupError when the
// agent is not in the graph.
double closeness(const InstantGraph& graph, std::string_view agent_id);

// Shortest-path costs from `source` to every vertex (infinity if unreachable).
std::vector<double> shortest_path_costs(const InstantGraph& graph, std::size_t source);

// Cumulative degree recurrence: prev + number of new slower neighbors.
inline double degree_step(double prev, std::size_t new_neighbor_count) {
  return prev + static_cast<double>(new_neighbor_count);
}

// Closeness on each frame's instantaneous graph and degree along one
// cumulative-adjacency chain started at `window.first`. Frames without agents
// are skipped. Throws ValidationError for an empty window.
SeriesMap compute_series(const TrajectoryTable& table, double mu, const FrameWindow& window,
                         std::size_t capacity = 256);

// `frame,agent_id,kind,value` rows, ordered by agent then kind then frame.
void write_series_csv(std::ostream& out, const SeriesMap& series);

}  // namespace drivestyle
