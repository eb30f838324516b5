#include "antroute/packet_app.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "antroute/errors.hpp"

namespace antroute {

void record_visit(Packet& packet, NodeId node) {
  packet.path_trace.push_back(node);
  auto& stack = packet.visited_stack;
  auto it = std::find(stack.begin(), stack.end(), node);
  if (it == stack.end()) {
    stack.push_back(node);
    return;
  }
  ++packet.loop_count;
  stack.erase(it + 1, stack.end());
}

std::vector<Candidate> top_phi_distribution(std::span<const double> row, std::size_t phi) {
  if (phi < 1) throw ParameterError("phi must be >= 1");
  std::vector<InterfaceIndex> order(row.size());
  std::iota(order.begin(), order.end(), InterfaceIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](InterfaceIndex x, InterfaceIndex y) { return row[x] > row[y]; });
  order.resize(std::min(phi, order.size()));

  double total = 0.0;
  for (auto k : order) total += row[k];
  std::vector<Candidate> out;
  out.reserve(order.size());
  for (auto k : order) out.push_back({k, total > 0.0 ? row[k] / total : 1.0 / static_cast<double>(order.size())});
  return out;
}

namespace {

InterfaceIndex sample(const std::vector<Candidate>& candidates, Rng& rng) {
  if (candidates.size() == 1) return candidates.front().interface;
  const double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& c : candidates) {
    acc += c.probability;
    if (u < acc) return c.interface;
  }
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it)
    if (it->probability > 0.0) return it->interface;
  return candidates.back().interface;
}

}  // namespace

RouteResult route_packet(NodeId source, NodeId destination, std::span<const RoutingTable> tables, const Topology& topology,
                         const TrafficConfig& config, Rng& rng) {
  if (source == destination) throw ParameterError("packet source equals destination");
  RouteResult result;
  auto& p = result.packet;
  p.source = source;
  p.destination = destination;
  p.ttl = config.ttl;
  record_visit(p, source);

  NodeId node = source;
  for (;;) {
    const auto candidates = top_phi_distribution(tables[node].row(destination), config.phi);
    const auto live = std::count_if(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.probability > kMultipathEpsilon; });
    if (live >= 2) p.multipath = true;

    const NodeId next = topology.interface(node, sample(candidates, rng)).neighbor;
    --p.ttl;
    if (next == destination) {
      record_visit(p, next);
      result.outcome = RouteOutcome::Delivered;
      return result;
    }
    if (next == source && config.source_absorption) {
      p.path_trace.push_back(next);
      result.outcome = RouteOutcome::AbsorbedAtSource;
      return result;
    }
    if (p.ttl == 0) {
      p.path_trace.push_back(next);
      result.outcome = RouteOutcome::TtlExpired;
      return result;
    }
    record_visit(p, next);
    node = next;
  }
}

namespace {

double pct(std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

double TrafficMetrics::success_pct() const { return pct(delivered, packets); }
double TrafficMetrics::loop_pct() const { return pct(packets_with_loops, packets); }
double TrafficMetrics::multipath_pct() const { return pct(multipath_packets, packets); }
double TrafficMetrics::ttl_drop_pct() const { return pct(ttl_drops, packets); }

std::uint64_t PathRecord::delivered(NodeId source, NodeId destination) const {
  auto it = pairs.find({source, destination});
  if (it == pairs.end()) return 0;
  std::uint64_t n = 0;
  for (const auto& [path, stats] : it->second) n += stats.frequency;
  return n;
}

double path_cost(const Topology& topology, std::span<const NodeId> path) {
  double cost = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto k = topology.interface_to(path[i - 1], path[i]);
    if (k >= topology.degree(path[i - 1])) throw InternalError("path steps between non-adjacent nodes");
    cost += topology.interface(path[i - 1], k).out_cost;
  }
  return cost;
}

std::vector<std::pair<NodeId, NodeId>> select_pairs(std::size_t node_count, const TrafficConfig& config) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (node_count <= config.all_pairs_limit) {
    for (NodeId s = 0; s < node_count; ++s)
      for (NodeId d = 0; d < node_count; ++d)
        if (s != d) pairs.emplace_back(s, d);
    return pairs;
  }
  const std::size_t target = std::min(config.sampled_pairs, node_count * (node_count - 1));
  Rng rng(derive_seed({config.seed, 0x70616972ULL}));
  std::set<std::pair<NodeId, NodeId>> chosen;
  while (chosen.size() < target) {
    const auto s = static_cast<NodeId>(rng.uniform_index(node_count));
    auto d = static_cast<NodeId>(rng.uniform_index(node_count - 1));
    if (d >= s) ++d;
    chosen.emplace(s, d);
  }
  return {chosen.begin(), chosen.end()};
}

TrafficResult run_traffic_experiment(const Topology& topology, std::span<const RoutingTable> tables, const TrafficConfig& config) {
  if (tables.size() != topology.node_count()) throw ValidationError("routing tables do not match topology node count");
  for (NodeId n = 0; n < tables.size(); ++n)
    if (tables[n].degree() != topology.degree(n) || tables[n].destinations() != topology.node_count())
      throw ValidationError("routing table shape mismatch at node " + std::to_string(n));
  if (config.phi < 1) throw ParameterError("phi must be >= 1");
  if (config.ttl < 1) throw ParameterError("ttl must be >= 1");

  TrafficResult result;
  auto& m = result.metrics;
  for (const auto& [s, d] : select_pairs(topology.node_count(), config)) {
    Rng rng(derive_seed({config.seed, s, d}));
    auto& paths = result.paths.pairs[{s, d}];
    for (std::size_t i = 0; i < config.packets_per_pair; ++i) {
      auto r = route_packet(s, d, tables, topology, config, rng);
      ++m.packets;
      if (r.packet.multipath) ++m.multipath_packets;
      if (r.outcome == RouteOutcome::TtlExpired) {
        ++m.ttl_drops;
        continue;
      }
      if (r.packet.loop_count > 0) ++m.packets_with_loops;
      m.total_loops += r.packet.loop_count;
      ++m.loop_histogram[r.packet.loop_count];
      if (r.outcome == RouteOutcome::AbsorbedAtSource) {
        ++m.absorbed_at_source;
        continue;
      }
      ++m.delivered;
      auto [it, fresh] = paths.try_emplace(r.packet.path_trace);
      if (fresh) it->second.cost = path_cost(topology, r.packet.path_trace);
      ++it->second.frequency;
    }
  }
  return result;
}

DecileBuckets traffic_distribution_buckets(const PathRecord& record) {
  DecileBuckets out;
  for (const auto& [pair, paths] : record.pairs) {
    if (paths.empty()) {
      ++out.pairs_excluded;
      continue;
    }
    std::vector<const PathStats*> ranked;
    ranked.reserve(paths.size());
    for (const auto& [seq, stats] : paths) ranked.push_back(&stats);
    std::stable_sort(ranked.begin(), ranked.end(), [](const PathStats* x, const PathStats* y) { return x->cost < y->cost; });
    const std::size_t m = ranked.size();
    for (std::size_t r = 0; r < m; ++r) out.frequency[(10 * r) / m] += ranked[r]->frequency;
    ++out.pairs_used;
  }
  return out;
}

}  // namespace antroute
