#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aes/error.hpp"
#include "aes/scenario.hpp"

namespace aes {

using NodeId = std::size_t;

enum class Role : std::uint8_t { Member, Boundary };

struct Node {
  NodeId id = 0;
  Point pos;
  std::size_t region = 0;
  Role role = Role::Member;
};

struct Region {
  std::size_t id = 0;
  std::size_t col = 0;
  std::size_t row = 0;
  Rect bounds;
  std::vector<NodeId> members;
  std::optional<NodeId> boundary;
};

struct Topology {
  std::vector<Node> nodes;
  std::vector<Region> regions;
  std::size_t cols = 0;
  std::size_t rows = 0;
  double region_size = 0.0;
  Point sink;
  std::size_t sink_region = 0;

  std::size_t region_at(Point p) const {
    auto clamp_index = [](double v, std::size_t n) {
      const auto i = static_cast<std::ptrdiff_t>(std::floor(v));
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
    };
    const std::size_t c = clamp_index(p.x / region_size, cols);
    const std::size_t r = clamp_index(p.y / region_size, rows);
    return r * cols + c;
  }

  // 8-neighbourhood on the region grid; a region is not adjacent to itself.
  bool adjacent(std::size_t a, std::size_t b) const {
    if (a == b) return false;
    const auto& ra = regions[a];
    const auto& rb = regions[b];
    const auto dc = ra.col > rb.col ? ra.col - rb.col : rb.col - ra.col;
    const auto dr = ra.row > rb.row ? ra.row - rb.row : rb.row - ra.row;
    return dc <= 1 && dr <= 1;
  }

  std::vector<NodeId> boundary_nodes() const {
    std::vector<NodeId> out;
    for (const auto& r : regions) {
      if (r.boundary) out.push_back(*r.boundary);
    }
    return out;
  }
};

// Unit uniform in [0,1) from the top 53 bits; keeps draws identical across
// standard library implementations.
template <class Engine>
double unit_uniform(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Member closest to the sink among those accepted by `eligible`; ties go to
/// the lowest id.
inline NodeId elect_boundary(const Region& region, std::span<const Node> nodes, Point sink,
                             const std::function<bool(NodeId)>& eligible = {}) {
  std::optional<NodeId> best;
  double best_d = 0.0;
  for (NodeId id : region.members) {
    if (eligible && !eligible(id)) continue;
    const double d = distance(nodes[id].pos, sink);
    if (!best || d < best_d || (d == best_d && id < *best)) {
      best = id;
      best_d = d;
    }
  }
  if (!best) throw InvalidArgument("elect_boundary: region " + std::to_string(region.id) + " has no eligible member");
  return *best;
}

/// Tile the field into regions, deal nodes to regions round-robin, place them
/// uniformly inside their region and elect one boundary node per non-empty
/// region.
inline Topology generate_topology(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Topology topo;
  topo.cols = cfg.region_cols();
  topo.rows = cfg.region_rows();
  topo.region_size = cfg.region_size_m;
  topo.sink = cfg.sink;

  for (std::size_t r = 0; r < topo.rows; ++r) {
    for (std::size_t c = 0; c < topo.cols; ++c) {
      Region reg;
      reg.id = r * topo.cols + c;
      reg.col = c;
      reg.row = r;
      reg.bounds = {static_cast<double>(c) * cfg.region_size_m, static_cast<double>(r) * cfg.region_size_m,
                    static_cast<double>(c + 1) * cfg.region_size_m, static_cast<double>(r + 1) * cfg.region_size_m};
      topo.regions.push_back(std::move(reg));
    }
  }
  topo.sink_region = topo.region_at(cfg.sink);

  std::mt19937_64 rng(seed);
  topo.nodes.reserve(cfg.node_count);
  for (NodeId id = 0; id < cfg.node_count; ++id) {
    auto& reg = topo.regions[id % topo.regions.size()];
    const double x = reg.bounds.x0 + unit_uniform(rng) * cfg.region_size_m;
    const double y = reg.bounds.y0 + unit_uniform(rng) * cfg.region_size_m;
    topo.nodes.push_back(Node{id, {x, y}, reg.id, Role::Member});
    reg.members.push_back(id);
  }

  for (auto& reg : topo.regions) {
    if (reg.members.empty()) continue;
    reg.boundary = elect_boundary(reg, topo.nodes, cfg.sink);
    topo.nodes[*reg.boundary].role = Role::Boundary;
  }
  return topo;
}

struct Hop {
  bool to_sink = false;
  NodeId node = 0;

  friend bool operator==(const Hop&, const Hop&) = default;
};

/// Next relay for a packet held by `from`.
///
/// Candidates are the current boundary nodes of adjacent regions, any node
/// in `active` within radio range, and the sink when it is in range or its
/// region is `from`'s own or an adjacent one. Only candidates strictly closer
/// to the sink than `from` qualify; the closest wins, ties by lowest id.
/// nullopt means no progress is possible right now.
inline std::optional<Hop> plan_next_hop(NodeId from, const Topology& topo, std::span<const NodeId> active,
                                        double radio_range) {
  const Node& src = topo.nodes.at(from);
  const double own = distance(src.pos, topo.sink);

  const bool sink_reachable = distance(src.pos, topo.sink) <= radio_range ||
                              src.region == topo.sink_region || topo.adjacent(src.region, topo.sink_region);
  if (sink_reachable && own > 0.0) return Hop{true, 0};

  std::optional<NodeId> best;
  double best_d = 0.0;
  auto consider = [&](NodeId id) {
    if (id == from) return;
    const double d = distance(topo.nodes[id].pos, topo.sink);
    if (!(d < own)) return;
    if (!best || d < best_d || (d == best_d && id < *best)) {
      best = id;
      best_d = d;
    }
  };
  for (const auto& reg : topo.regions) {
    if (reg.boundary && topo.adjacent(src.region, reg.id)) consider(*reg.boundary);
  }
  for (NodeId id : active) {
    if (distance(topo.nodes[id].pos, src.pos) <= radio_range) consider(id);
  }
  if (!best) return std::nullopt;
  return Hop{false, *best};
}

}  // namespace aes
