#include "antroute/sim_engine.hpp"

#include <cmath>
#include <string>

#include "antroute/errors.hpp"

namespace antroute {

void validate(const SimConfig& config) {
  validate(config.params);
  if (config.ant_period <= 0) throw ParameterError("ant_period must be positive");
  if (config.duration <= config.ant_period) throw ParameterError("duration must exceed ant_period");
  if (!(config.uncontrolled_fraction > 0.0 && config.uncontrolled_fraction < 1.0))
    throw ParameterError("uncontrolled_fraction must be in (0, 1)");
  if (config.link_delay <= 0) throw ParameterError("link_delay must be positive");
}

SimTime controlled_phase_start(const SimConfig& config) {
  return static_cast<SimTime>(std::llround(static_cast<double>(config.duration) * config.uncontrolled_fraction));
}

void EventQueue::schedule(SimEvent event) {
  if (event.fire_time < now_)
    throw InternalError("event scheduled at t=" + std::to_string(event.fire_time) + " before now=" + std::to_string(now_));
  event.sequence = next_sequence_++;
  heap_.push(std::move(event));
}

SimEvent EventQueue::dispatch() {
  if (heap_.empty()) throw InternalError("dispatch on an empty event queue");
  SimEvent ev = heap_.top();
  heap_.pop();
  now_ = ev.fire_time;
  return ev;
}

void transit_ant(EventQueue& queue, const Topology& topology, const Ant& ant, NodeId from, InterfaceIndex interface,
                 SimTime link_delay) {
  const auto& iface = topology.interface(from, interface);
  SimEvent ev;
  ev.fire_time = queue.now() + link_delay;
  ev.kind = SimEvent::Kind::AntArrival;
  ev.node = iface.neighbor;
  ev.arrival_interface = iface.reverse;
  ev.ant = ant;
  queue.schedule(std::move(ev));
}

double ExplorationStats::fallback_fraction() const {
  const auto decisions = uncontrolled_decisions + controlled_decisions + regular_decisions;
  if (decisions == 0) return 0.0;
  return static_cast<double>(no_eligible_sendbacks + source_uncontrolled_fallbacks) / static_cast<double>(decisions);
}

namespace {

class Exploration {
 public:
  Exploration(const Topology& topology, const SimConfig& config, const DecisionObserver& observer)
      : topo_(topology), cfg_(config), observer_(observer), rng_(config.seed), boundary_(controlled_phase_start(config)) {
    const auto n = topo_.node_count();
    result_.tables.reserve(n);
    result_.models.reserve(n);
    for (NodeId i = 0; i < n; ++i) {
      result_.tables.push_back(init_routing_table(i, topo_));
      result_.models.push_back(init_stat_model(i, topo_));
    }
  }

  ExplorationResult run() {
    const auto n = topo_.node_count();
    for (NodeId i = 0; i < n; ++i) {
      SimEvent ev;
      ev.fire_time = static_cast<SimTime>(i) % cfg_.ant_period;
      ev.kind = SimEvent::Kind::AntGeneration;
      ev.node = i;
      queue_.schedule(std::move(ev));
    }

    auto& stats = result_.stats;
    while (!queue_.empty() && queue_.top().fire_time < cfg_.duration) {
      SimEvent ev = queue_.dispatch();
      ++stats.events_dispatched;
      if (ev.kind == SimEvent::Kind::AntGeneration)
        generate(ev.node);
      else
        receive(ev.ant, ev.node, ev.arrival_interface);
    }
    while (!queue_.empty()) {
      if (queue_.dispatch().kind == SimEvent::Kind::AntArrival) ++stats.ants_in_flight_at_end;
    }
    stats.final_time = cfg_.duration;
    return std::move(result_);
  }

 private:
  void generate(NodeId node) {
    const auto n = topo_.node_count();
    auto dest = static_cast<NodeId>(rng_.uniform_index(n - 1));
    if (dest >= node) ++dest;

    Ant ant;
    ant.source = node;
    ant.destination = dest;
    const auto choice = select(ant, node, std::nullopt);
    ant.origin_interface = choice;
    result_.models[node].record_send(dest, choice);
    ++result_.stats.ants_generated;
    forward(ant, node, choice);

    SimEvent next;
    next.fire_time = queue_.now() + cfg_.ant_period;
    next.kind = SimEvent::Kind::AntGeneration;
    next.node = node;
    queue_.schedule(std::move(next));
  }

  void receive(Ant& ant, NodeId node, InterfaceIndex arrival) {
    auto& stats = result_.stats;
    if (node == ant.source) {
      result_.models[node].record_return(ant.destination, *ant.origin_interface);
      ++stats.ants_returned_to_source;
      return;
    }
    accumulate_reverse_cost(ant, arrival, node, topo_);
    if (node == ant.destination) {
      reinforce(node, ant, arrival);
      ++stats.ants_absorbed_at_destination;
      return;
    }
    if (cfg_.subpath_reinforcement) reinforce(node, ant, arrival);
    if (cfg_.ant_max_hops != 0 && ant.hops >= cfg_.ant_max_hops) {
      ++stats.ants_expired;
      return;
    }
    forward(ant, node, select(ant, node, arrival));
  }

  void reinforce(NodeId node, const Ant& ant, InterfaceIndex arrival) {
    auto& table = result_.tables[node];
    update_route_table(table, ant.source, arrival, compute_delta_p(ant.cost, cfg_.params));
    ++result_.stats.table_updates;
    if (cfg_.verify_rows) {
      double sum = 0.0;
      for (double p : table.row(ant.source)) {
        if (!(p >= 0.0)) throw InternalError("negative routing probability at node " + std::to_string(node));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InternalError("routing row at node " + std::to_string(node) + " sums to " + std::to_string(sum));
      ++result_.stats.rows_verified;
    }
  }

  InterfaceIndex select(const Ant& ant, NodeId node, std::optional<InterfaceIndex> arrival) {
    auto& stats = result_.stats;
    const auto& model = result_.models[node];
    DecisionRecord rec;
    rec.time = queue_.now();
    rec.node = node;
    rec.ant = &ant;
    rec.arrival_interface = arrival;
    rec.model = &model;

    if (cfg_.policy == AntPolicy::RegularAnts) {
      rec.mode = SelectionMode::Regular;
      rec.selection.interface = select_interface_regular(result_.tables[node].row(ant.destination), rng_);
      ++stats.regular_decisions;
    } else if (cfg_.policy == AntPolicy::UniformAnts || queue_.now() < boundary_) {
      rec.mode = SelectionMode::Uncontrolled;
      rec.selection.interface = select_interface_uncontrolled(topo_.degree(node), arrival, rng_);
      ++stats.uncontrolled_decisions;
    } else {
      rec.mode = SelectionMode::Controlled;
      rec.selection = select_interface_controlled(model, ant.destination, arrival, cfg_.params.tau, cfg_.params.controlled_no_return, rng_);
      ++stats.controlled_decisions;
      switch (rec.selection.fallback) {
        case Fallback::LeafSendBack: ++stats.leaf_sendbacks; break;
        case Fallback::NoEligibleSendBack: ++stats.no_eligible_sendbacks; break;
        case Fallback::SourceUncontrolled: ++stats.source_uncontrolled_fallbacks; break;
        case Fallback::None: break;
      }
    }
    if (observer_) observer_(rec);
    return rec.selection.interface;
  }

  void forward(Ant& ant, NodeId node, InterfaceIndex interface) {
    ++ant.hops;
    transit_ant(queue_, topo_, ant, node, interface, cfg_.link_delay);
  }

  const Topology& topo_;
  const SimConfig& cfg_;
  const DecisionObserver& observer_;
  Rng rng_;
  SimTime boundary_;
  EventQueue queue_;
  ExplorationResult result_;
};

}  // namespace

ExplorationResult run_exploration(const Topology& topology, const SimConfig& config, const DecisionObserver& observer) {
  validate(config);
  return Exploration(topology, config, observer).run();
}

}  // namespace antroute
