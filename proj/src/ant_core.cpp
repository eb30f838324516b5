#include "antroute/ant_core.hpp"

#include <cmath>
#include <string>

#include "antroute/errors.hpp"

namespace antroute {

RoutingTable::RoutingTable(std::size_t destinations, std::size_t degree)
    : destinations_(destinations), degree_(degree), probs_(destinations * degree, degree ? 1.0 / static_cast<double>(degree) : 0.0) {}

StatModel::StatModel(std::size_t destinations, std::size_t degree)
    : destinations_(destinations), degree_(degree), sent_(destinations * degree, 0), returned_(destinations * degree, 0) {}

double StatModel::ratio(NodeId destination, InterfaceIndex k) const {
  const auto i = index(destination, k);
  if (sent_[i] == 0) return 0.0;
  return static_cast<double>(returned_[i]) / static_cast<double>(sent_[i]);
}

void StatModel::record_send(NodeId destination, InterfaceIndex k) { ++sent_[index(destination, k)]; }

void StatModel::record_return(NodeId destination, InterfaceIndex k) {
  const auto i = index(destination, k);
  if (returned_[i] + 1 > sent_[i])
    throw InternalError("ant returned on interface " + std::to_string(k) + " for destination " + std::to_string(destination) +
                        " without a matching send");
  ++returned_[i];
}

void StatModel::set_counts(NodeId destination, InterfaceIndex k, std::uint64_t sent, std::uint64_t returned) {
  if (returned > sent) throw ValidationError("returned count exceeds sent count");
  const auto i = index(destination, k);
  sent_[i] = sent;
  returned_[i] = returned;
}

void validate(const ReinforcementParams& params) {
  if (!(params.lambda > 0.0) || !std::isfinite(params.lambda)) throw ParameterError("lambda must be positive");
  if (!(params.tau >= 0.0 && params.tau <= 1.0)) throw ParameterError("tau must be in [0, 1]");
}

RoutingTable init_routing_table(NodeId node, const Topology& topology) {
  return RoutingTable(topology.node_count(), topology.degree(node));
}

StatModel init_stat_model(NodeId node, const Topology& topology) { return StatModel(topology.node_count(), topology.degree(node)); }

void reinforce_row(std::span<double> row, InterfaceIndex k, double delta_p) {
  if (k >= row.size()) throw InternalError("reinforced interface out of range");
  if (!(delta_p >= 0.0) || !std::isfinite(delta_p)) throw InternalError("delta_p must be a non-negative finite value");
  const double scale = 1.0 / (1.0 + delta_p);
  for (std::size_t m = 0; m < row.size(); ++m) row[m] = m == k ? (row[m] + delta_p) * scale : row[m] * scale;
}

void update_route_table(RoutingTable& table, NodeId ant_source, InterfaceIndex arrival_interface, double delta_p) {
  reinforce_row(table.row(ant_source), arrival_interface, delta_p);
}

double compute_delta_p(double cost, const ReinforcementParams& params) {
  if (!(cost > 0.0)) throw InternalError("delta_p requested for non-positive cost");
  switch (params.cost_fn) {
    case CostFunction::Linear:
      return params.lambda / cost;
    case CostFunction::Quadratic:
      return params.lambda / (cost * cost);
  }
  return params.lambda / cost;
}

void accumulate_reverse_cost(Ant& ant, InterfaceIndex arrival_interface, NodeId at_node, const Topology& topology) {
  ant.cost += topology.interface(at_node, arrival_interface).out_cost;
}

InterfaceIndex select_interface_uncontrolled(std::size_t degree, std::optional<InterfaceIndex> arrival_interface, Rng& rng) {
  if (degree == 0) throw InternalError("node without interfaces");
  if (!arrival_interface) return static_cast<InterfaceIndex>(rng.uniform_index(degree));
  if (degree == 1) return *arrival_interface;
  // Draw from degree-1 slots and skip over the arrival interface.
  auto k = static_cast<InterfaceIndex>(rng.uniform_index(degree - 1));
  if (k >= *arrival_interface) ++k;
  return k;
}

std::vector<InterfaceIndex> eligible_interfaces(const StatModel& model, NodeId destination, double tau) {
  std::vector<InterfaceIndex> out;
  for (InterfaceIndex k = 0; k < model.degree(); ++k)
    if (model.ratio(destination, k) < tau) out.push_back(k);
  return out;
}

Selection select_interface_controlled(const StatModel& model, NodeId destination,
                                      std::optional<InterfaceIndex> arrival_interface, double tau, bool no_return, Rng& rng) {
  const std::size_t degree = model.degree();
  if (degree == 0) throw InternalError("node without interfaces");

  if (arrival_interface && degree == 1) return {*arrival_interface, Fallback::LeafSendBack};

  auto eligible = eligible_interfaces(model, destination, tau);
  if (eligible.empty()) {
    if (arrival_interface) return {*arrival_interface, Fallback::NoEligibleSendBack};
    return {select_interface_uncontrolled(degree, std::nullopt, rng), Fallback::SourceUncontrolled};
  }
  if (arrival_interface && no_return && eligible.size() > 1) std::erase(eligible, *arrival_interface);
  return {eligible[rng.uniform_index(eligible.size())], Fallback::None};
}

InterfaceIndex select_interface_regular(std::span<const double> row, Rng& rng) {
  if (row.empty()) throw InternalError("empty probability row");
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] <= 0.0) continue;
    last_positive = k;
    acc += row[k];
    if (u < acc) return static_cast<InterfaceIndex>(k);
  }
  // u landed in the rounding gap between acc and 1.
  return static_cast<InterfaceIndex>(last_positive);
}

}  // namespace antroute
