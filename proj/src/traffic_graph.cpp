#include "drivestyle/traffic_graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {
constexpr const char* kModule = "traffic_graph";
}

InstantGraph::InstantGraph(std::vector<GraphVertex> vertices, double mu)
    : vertices_(std::move(vertices)), adjacency_(vertices_.size()), mu_(mu) {
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw ValidationError(kModule, "mu must be positive");
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!index_.emplace(vertices_[i].agent_id, i).second) {
      throw ValidationError(kModule, "duplicate agent_id '" + vertices_[i].agent_id +
                                         "' in one frame");
    }
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      const double d2 = squared_distance(vertices_[i].position, vertices_[j].position);
      if (d2 < mu_) {
        const double cost = std::max(d2, kMinEdgeCost);
        edges_.push_back({i, j, cost});
        adjacency_[i].emplace_back(j, cost);
        adjacency_[j].emplace_back(i, cost);
      }
    }
  }
}

std::optional<std::size_t> InstantGraph::index_of(std::string_view agent_id) const {
  const auto it = index_.find(std::string(agent_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

InstantGraph build_instant_graph(std::span<const AgentFrame> frame, double mu) {
  if (frame.empty()) throw ValidationError(kModule, "cannot build a graph from an empty frame");
  std::vector<GraphVertex> vertices;
  vertices.reserve(frame.size());
  for (const auto& a : frame) vertices.push_back({a.agent_id, a.position});
  return InstantGraph(std::move(vertices), mu);
}

CumulativeAdjacency::CumulativeAdjacency(std::size_t capacity)
    : capacity_(capacity), matrix_(capacity * capacity, 0.0) {
  if (capacity_ == 0) throw ValidationError(kModule, "capacity must be positive");
}

std::optional<std::size_t> CumulativeAdjacency::slot(std::string_view agent_id) const {
  const auto it = slot_of_.find(std::string(agent_id));
  if (it == slot_of_.end()) return std::nullopt;
  return it->second;
}

void CumulativeAdjacency::reset() {
  std::fill(matrix_.begin(), matrix_.end(), 0.0);
  slot_of_.clear();
  seen_.clear();
  ++resets_;
}

NeighborCounts CumulativeAdjacency::update(const InstantGraph& graph, const SpeedMap& speeds) {
  const auto& vertices = graph.vertices();
  std::vector<double> speed(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto it = speeds.find(vertices[i].agent_id);
    if (it == speeds.end()) {
      throw ContractViolation(kModule, "no speed for agent '" + vertices[i].agent_id + "'");
    }
    speed[i] = it->second;
  }

  std::size_t unseen = 0;
  for (const auto& v : vertices) {
    if (!slot(v.agent_id)) ++unseen;
  }
  if (slot_of_.size() + unseen > capacity_) {
    if (vertices.size() > capacity_) {
      throw ValidationError(kModule, "frame holds " + std::to_string(vertices.size()) +
                                         " agents, more than capacity " +
                                         std::to_string(capacity_));
    }
    reset();
  }
  std::vector<std::size_t> slots(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    auto [it, inserted] = slot_of_.try_emplace(vertices[i].agent_id, slot_of_.size());
    if (inserted) seen_.emplace_back();
    slots[i] = it->second;
  }

  NeighborCounts counts;
  for (const auto& v : vertices) counts[v.agent_id] = 0;

  // Decide "new" against the history before this frame, then record.
  for (const auto& e : graph.edges()) {
    const auto& id_a = vertices[e.a].agent_id;
    const auto& id_b = vertices[e.b].agent_id;
    auto& seen_a = seen_[slots[e.a]];
    auto& seen_b = seen_[slots[e.b]];
    if (!seen_a.contains(id_b) && speed[e.a] > speed[e.b]) ++counts[id_a];
    if (!seen_b.contains(id_a) && speed[e.b] > speed[e.a]) ++counts[id_b];
  }
  for (const auto& e : graph.edges()) {
    const auto sa = slots[e.a];
    const auto sb = slots[e.b];
    seen_[sa].insert(vertices[e.b].agent_id);
    seen_[sb].insert(vertices[e.a].agent_id);
    double& w_ab = matrix_[sa * capacity_ + sb];
    if (w_ab == 0.0) {
      w_ab = e.cost;
      matrix_[sb * capacity_ + sa] = e.cost;
    }
  }
  return counts;
}

double CumulativeAdjacency::weight(std::string_view a, std::string_view b) const {
  const auto sa = slot(a);
  const auto sb = slot(b);
  if (!sa || !sb) return 0.0;
  return matrix_[*sa * capacity_ + *sb];
}

bool CumulativeAdjacency::has_seen(std::string_view ego, std::string_view other) const {
  const auto s = slot(ego);
  return s && seen_[*s].contains(std::string(other));
}

std::size_t CumulativeAdjacency::seen_count(std::string_view ego) const {
  const auto s = slot(ego);
  return s ? seen_[*s].size() : 0;
}

std::size_t CumulativeAdjacency::support_size() const {
  return static_cast<std::size_t>(
      std::count_if(matrix_.begin(), matrix_.end(), [](double w) { return w != 0.0; }));
}

void CumulativeAdjacency::dump(std::ostream& out) const {
  for (std::size_t i = 0; i < capacity_; ++i) {
    for (std::size_t j = 0; j < capacity_; ++j) {
      if (j) out << ' ';
      out << format_number(matrix_[i * capacity_ + j]);
    }
    out << '\n';
  }
}

std::pair<CumulativeAdjacency, NeighborCounts> update_cumulative(CumulativeAdjacency state,
                                                                 const InstantGraph& graph,
                                                                 const SpeedMap& speeds) {
  auto counts = state.update(graph, speeds);
  return {std::move(state), std::move(counts)};
}

}  // namespace drivestyle
