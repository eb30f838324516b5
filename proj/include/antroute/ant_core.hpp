#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "antroute/random.hpp"
#include "antroute/topology.hpp"

namespace antroute {

// Exploration probe. `cost` is the accumulated reverse-direction cost back to
// the source; `origin_interface` is fixed once by the source's selection.
struct Ant {
  NodeId source = 0;
  NodeId destination = 0;
  double cost = 0.0;
  std::optional<InterfaceIndex> origin_interface;
  std::uint32_t hops = 0;
};

// Per-node forwarding probabilities, one row per destination over the node's
// interfaces. Rows start uniform and stay row-stochastic under reinforce().
class RoutingTable {
 public:
  RoutingTable() = default;
  RoutingTable(std::size_t destinations, std::size_t degree);

  std::size_t destinations() const noexcept { return destinations_; }
  std::size_t degree() const noexcept { return degree_; }

  std::span<const double> row(NodeId destination) const {
    return {probs_.data() + static_cast<std::size_t>(destination) * degree_, degree_};
  }
  std::span<double> row(NodeId destination) {
    return {probs_.data() + static_cast<std::size_t>(destination) * degree_, degree_};
  }

  friend bool operator==(const RoutingTable&, const RoutingTable&) = default;

 private:
  std::size_t destinations_ = 0;
  std::size_t degree_ = 0;
  std::vector<double> probs_;
};

// Sent / returned ant counters kept at the ant's source, indexed
// [destination][interface].
class StatModel {
 public:
  StatModel() = default;
  StatModel(std::size_t destinations, std::size_t degree);

  std::size_t destinations() const noexcept { return destinations_; }
  std::size_t degree() const noexcept { return degree_; }

  std::uint64_t sent(NodeId destination, InterfaceIndex k) const { return sent_[index(destination, k)]; }
  std::uint64_t returned(NodeId destination, InterfaceIndex k) const { return returned_[index(destination, k)]; }

  // returned / sent, or 0 for an interface that has never been tried.
  double ratio(NodeId destination, InterfaceIndex k) const;

  void record_send(NodeId destination, InterfaceIndex k);
  // Throws InternalError if the return has no matching send.
  void record_return(NodeId destination, InterfaceIndex k);

  // Bulk restore from a dump; enforces returned <= sent.
  void set_counts(NodeId destination, InterfaceIndex k, std::uint64_t sent, std::uint64_t returned);

  friend bool operator==(const StatModel&, const StatModel&) = default;

 private:
  std::size_t index(NodeId destination, InterfaceIndex k) const {
    return static_cast<std::size_t>(destination) * degree_ + k;
  }

  std::size_t destinations_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::uint64_t> sent_;
  std::vector<std::uint64_t> returned_;
};

enum class CostFunction { Linear, Quadratic };

struct ReinforcementParams {
  double lambda = 0.1;
  CostFunction cost_fn = CostFunction::Quadratic;
  double tau = 0.5;
  // Controlled selection skips the arrival interface when another eligible
  // interface exists.
  bool controlled_no_return = true;
};

void validate(const ReinforcementParams& params);

RoutingTable init_routing_table(NodeId node, const Topology& topology);
StatModel init_stat_model(NodeId node, const Topology& topology);

// p[k] <- (p[k] + dp) / (1 + dp), every other entry p[m] <- p[m] / (1 + dp).
void reinforce_row(std::span<double> row, InterfaceIndex k, double delta_p);

void update_route_table(RoutingTable& table, NodeId ant_source, InterfaceIndex arrival_interface, double delta_p);

// lambda / f(cost). Requires cost > 0.
double compute_delta_p(double cost, const ReinforcementParams& params);

// Adds the cost of traversing the arrival link in reverse (at_node -> neighbor).
void accumulate_reverse_cost(Ant& ant, InterfaceIndex arrival_interface, NodeId at_node, const Topology& topology);

enum class Fallback {
  None,
  LeafSendBack,        // intermediate leaf: only way out is the way in
  NoEligibleSendBack,  // intermediate node with every interface over threshold
  SourceUncontrolled,  // source with every interface over threshold
};

struct Selection {
  InterfaceIndex interface = 0;
  Fallback fallback = Fallback::None;
};

// Uniform over all interfaces at the source, over all but the arrival
// interface elsewhere, and back out the arrival interface at a leaf.
InterfaceIndex select_interface_uncontrolled(std::size_t degree, std::optional<InterfaceIndex> arrival_interface, Rng& rng);

// Interfaces whose returned/sent ratio is strictly below tau.
std::vector<InterfaceIndex> eligible_interfaces(const StatModel& model, NodeId destination, double tau);

Selection select_interface_controlled(const StatModel& model, NodeId destination,
                                      std::optional<InterfaceIndex> arrival_interface, double tau, bool no_return, Rng& rng);

// Samples an interface from a probability row by cumulative distribution.
InterfaceIndex select_interface_regular(std::span<const double> row, Rng& rng);

}  // namespace antroute
