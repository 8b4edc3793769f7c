#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "drivestyle/trajectory.hpp"

namespace drivestyle {

// Coincident agents get this cost so every edge cost stays in (0, mu).
inline constexpr double kMinEdgeCost = 1e-9;

struct GraphVertex {
  std::string agent_id;
  Vec2 position;
};

struct GraphEdge {
  std::size_t a = 0;  // vertex indices, a < b
  std::size_t b = 0;
  double cost = 0.0;  // squared distance, m^2
};

// Undirected proximity graph over the agents of one frame: an edge joins two
// agents iff their squared distance is strictly below mu.
class InstantGraph {
 public:
  InstantGraph(std::vector<GraphVertex> vertices, double mu);

  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  double mu() const { return mu_; }
  std::size_t size() const { return vertices_.size(); }

  std::optional<std::size_t> index_of(std::string_view agent_id) const;

  // (neighbor index, cost) pairs of vertex `v`.
  std::span<const std::pair<std::size_t, double>> neighbors(std::size_t v) const {
    return adjacency_[v];
  }

 private:
  std::vector<GraphVertex> vertices_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
  std::unordered_map<std::string, std::size_t> index_;
  double mu_;
};

// Throws ValidationError on an empty frame, a non-positive mu, or a duplicate
// agent id.
InstantGraph build_instant_graph(std::span<const AgentFrame> frame, double mu);

using SpeedMap = std::unordered_map<std::string, double>;
using NeighborCounts = std::map<std::string, std::size_t>;

// Cumulative adjacency A_t over at most `capacity` observed agents. Edges are
// only ever added; the first observed cost is retained. When admitting the
// agents of a new frame would exceed capacity, all state is cleared first.
class CumulativeAdjacency {
 public:
  explicit CumulativeAdjacency(std::size_t capacity = 256);

  // Applies one frame. Returns, for every vertex of `graph`, how many of its
  // current neighbors are "new": never connected before and slower than it.
  // Throws ContractViolation when a vertex has no speed entry.
  NeighborCounts update(const InstantGraph& graph, const SpeedMap& speeds);

  std::size_t capacity() const { return capacity_; }
  std::size_t observed_count() const { return slot_of_.size(); }
  std::size_t reset_count() const { return resets_; }

  // A(a, b); 0 when either agent is unobserved or they were never connected.
  double weight(std::string_view a, std::string_view b) const;
  bool has_seen(std::string_view ego, std::string_view other) const;
  std::size_t seen_count(std::string_view ego) const;
  // Number of non-zero entries of A.
  std::size_t support_size() const;

  // Dense N x N text dump, one row per line, for inspection.
  void dump(std::ostream& out) const;

 private:
  std::optional<std::size_t> slot(std::string_view agent_id) const;
  void reset();

  std::size_t capacity_;
  std::vector<double> matrix_;  // row-major capacity_ x capacity_
  std::unordered_map<std::string, std::size_t> slot_of_;
  std::vector<std::unordered_set<std::string>> seen_;
  std::size_t resets_ = 0;
};

// Functional form of CumulativeAdjacency::update.
std::pair<CumulativeAdjacency, NeighborCounts> update_cumulative(CumulativeAdjacency state,
                                                                 const InstantGraph& graph,
                                                                 const SpeedMap& speeds);

}  // namespace drivestyle
