#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "antroute/ant_core.hpp"
#include "antroute/random.hpp"
#include "antroute/topology.hpp"

namespace antroute {

inline constexpr std::uint32_t kDefaultPacketTtl = 255;

struct Packet {
  NodeId source = 0;
  NodeId destination = 0;
  std::uint32_t ttl = kDefaultPacketTtl;
  std::vector<NodeId> visited_stack;
  std::uint32_t loop_count = 0;
  bool multipath = false;
  std::vector<NodeId> path_trace;
};

// Revisit pops the stack back to (and keeping) the node and counts a loop;
// a first visit pushes. The trace always grows.
void record_visit(Packet& packet, NodeId node);

struct Candidate {
  InterfaceIndex interface = 0;
  double probability = 0.0;
};

// The min(phi, degree) most probable interfaces (ties by lower index), with
// probabilities rescaled to sum to 1.
std::vector<Candidate> top_phi_distribution(std::span<const double> row, std::size_t phi);

struct TrafficConfig {
  std::size_t phi = 1;
  bool source_absorption = true;
  std::size_t packets_per_pair = 100;
  std::uint32_t ttl = kDefaultPacketTtl;
  // Above this many nodes only `sampled_pairs` random ordered pairs are routed.
  std::size_t all_pairs_limit = 100;
  std::size_t sampled_pairs = 2000;
  std::uint64_t seed = 1;
};

enum class RouteOutcome { Delivered, AbsorbedAtSource, TtlExpired };

struct RouteResult {
  RouteOutcome outcome = RouteOutcome::Delivered;
  Packet packet;
};

// A decision counts toward multipath only when two or more candidates carry
// probability above this.
inline constexpr double kMultipathEpsilon = 1e-12;

RouteResult route_packet(NodeId source, NodeId destination, std::span<const RoutingTable> tables, const Topology& topology,
                         const TrafficConfig& config, Rng& rng);

struct TrafficMetrics {
  std::uint64_t packets = 0;
  std::uint64_t delivered = 0;
  std::uint64_t absorbed_at_source = 0;
  std::uint64_t ttl_drops = 0;
  std::uint64_t packets_with_loops = 0;
  std::uint64_t multipath_packets = 0;
  std::uint64_t total_loops = 0;
  std::map<std::uint32_t, std::uint64_t> loop_histogram;  // over delivered + absorbed

  double success_pct() const;
  double loop_pct() const;
  double multipath_pct() const;
  double ttl_drop_pct() const;
};

struct PathStats {
  std::uint64_t frequency = 0;
  double cost = 0.0;

  friend bool operator==(const PathStats&, const PathStats&) = default;
};

// Unique delivered paths per ordered (source, destination) pair.
struct PathRecord {
  std::map<std::pair<NodeId, NodeId>, std::map<std::vector<NodeId>, PathStats>> pairs;

  std::uint64_t delivered(NodeId source, NodeId destination) const;
};

struct TrafficResult {
  TrafficMetrics metrics;
  PathRecord paths;
};

// Ordered pairs routed by run_traffic_experiment for this topology size.
std::vector<std::pair<NodeId, NodeId>> select_pairs(std::size_t node_count, const TrafficConfig& config);

TrafficResult run_traffic_experiment(const Topology& topology, std::span<const RoutingTable> tables, const TrafficConfig& config);

// Sum of forward link costs along a node sequence.
double path_cost(const Topology& topology, std::span<const NodeId> path);

struct DecileBuckets {
  std::array<std::uint64_t, 10> frequency{};
  std::size_t pairs_used = 0;
  std::size_t pairs_excluded = 0;  // no delivered packets
};

// Ranks each pair's unique paths by cost (ascending) and adds each path's
// frequency to decile floor(10 * rank / path_count), rank counted from 0.
DecileBuckets traffic_distribution_buckets(const PathRecord& record);

}  // namespace antroute
