#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "antroute/ant_core.hpp"
#include "antroute/topology.hpp"

namespace antroute {

using SimTime = std::int64_t;  // microseconds

enum class AntPolicy { ModelBased, UniformAnts, RegularAnts };

struct SimConfig {
  SimTime duration = 10'000'000;
  SimTime ant_period = 10'000;
  double uncontrolled_fraction = 0.125;
  ReinforcementParams params;
  AntPolicy policy = AntPolicy::ModelBased;
  bool subpath_reinforcement = true;
  SimTime link_delay = 100;
  // Ants forwarded this many times without reaching source or destination are
  // dropped. 0 disables the limit.
  std::uint32_t ant_max_hops = 255;
  // Check the updated row after every routing-table update.
  bool verify_rows = false;
  std::uint64_t seed = 1;
};

void validate(const SimConfig& config);

// Controlled phase begins at this instant.
SimTime controlled_phase_start(const SimConfig& config);

struct SimEvent {
  enum class Kind { AntGeneration, AntArrival };

  SimTime fire_time = 0;
  std::uint64_t sequence = 0;
  Kind kind = Kind::AntGeneration;
  NodeId node = 0;
  InterfaceIndex arrival_interface = 0;
  Ant ant;
};

// Min-queue over (fire_time, sequence); sequence numbers are assigned on
// insertion so equal-time events leave in insertion order.
class EventQueue {
 public:
  SimTime now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  const SimEvent& top() const { return heap_.top(); }

  // Throws InternalError when fire_time < now().
  void schedule(SimEvent event);
  // Removes the earliest event and advances the clock to its time.
  SimEvent dispatch();

 private:
  struct Later {
    bool operator()(const SimEvent& x, const SimEvent& y) const {
      return x.fire_time != y.fire_time ? x.fire_time > y.fire_time : x.sequence > y.sequence;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

// Schedules the ant's arrival at the far end of `interface`, one link delay
// from now, tagged with the neighbor's local interface for the same link.
void transit_ant(EventQueue& queue, const Topology& topology, const Ant& ant, NodeId from, InterfaceIndex interface,
                 SimTime link_delay);

struct ExplorationStats {
  std::uint64_t ants_generated = 0;
  std::uint64_t ants_absorbed_at_destination = 0;
  std::uint64_t ants_returned_to_source = 0;
  std::uint64_t ants_expired = 0;  // hit ant_max_hops
  std::uint64_t ants_in_flight_at_end = 0;

  std::uint64_t uncontrolled_decisions = 0;
  std::uint64_t controlled_decisions = 0;
  std::uint64_t regular_decisions = 0;
  std::uint64_t leaf_sendbacks = 0;
  std::uint64_t no_eligible_sendbacks = 0;
  std::uint64_t source_uncontrolled_fallbacks = 0;

  std::uint64_t table_updates = 0;
  std::uint64_t rows_verified = 0;
  std::uint64_t events_dispatched = 0;
  SimTime final_time = 0;

  // Share of all forwarding decisions that fell back to a send-back at an
  // intermediate node with nothing eligible, or to uncontrolled choice at
  // the source.
  double fallback_fraction() const;
};

enum class SelectionMode { Uncontrolled, Controlled, Regular };

struct DecisionRecord {
  SimTime time = 0;
  NodeId node = 0;
  const Ant* ant = nullptr;
  std::optional<InterfaceIndex> arrival_interface;
  SelectionMode mode = SelectionMode::Uncontrolled;
  Selection selection;
  const StatModel* model = nullptr;  // the deciding node's model, before any send is recorded
};

using DecisionObserver = std::function<void(const DecisionRecord&)>;

struct ExplorationResult {
  std::vector<RoutingTable> tables;
  std::vector<StatModel> models;
  ExplorationStats stats;
};

// Runs uncontrolled then controlled exploration (or a single-policy
// comparison run) and returns the tables as they stand at `duration`.
ExplorationResult run_exploration(const Topology& topology, const SimConfig& config, const DecisionObserver& observer = {});

}  // namespace antroute
