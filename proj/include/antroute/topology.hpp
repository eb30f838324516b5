#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace antroute {

using NodeId = std::uint32_t;
using InterfaceIndex = std::uint32_t;

// Point-to-point link with a cost for each direction.
struct Link {
  NodeId a = 0;
  NodeId b = 0;
  double cost_ab = 1.0;
  double cost_ba = 1.0;

  friend bool operator==(const Link&, const Link&) = default;
};

// One end of a link as seen from the node that owns it.
struct Interface {
  NodeId neighbor = 0;
  std::size_t link = 0;         // index into Topology::links()
  double out_cost = 0.0;        // cost owner -> neighbor
  double in_cost = 0.0;         // cost neighbor -> owner
  InterfaceIndex reverse = 0;   // index of the same link at the neighbor
};

struct CostRange {
  double min = 1.0;
  double max = 1.0;
};

// Connected graph of nodes [0, N) with per-node interface lists sorted by
// neighbor id. Construct through Topology::build, which validates.
class Topology {
 public:
  static Topology build(std::size_t node_count, std::vector<Link> links);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  const std::vector<Link>& links() const noexcept { return links_; }
  std::span<const Interface> interfaces(NodeId node) const { return adjacency_.at(node); }
  const Interface& interface(NodeId node, InterfaceIndex k) const { return adjacency_.at(node).at(k); }
  std::size_t degree(NodeId node) const { return adjacency_.at(node).size(); }
  std::size_t max_degree() const noexcept;

  // Interface at `node` leading to `neighbor`, or degree(node) if not adjacent.
  InterfaceIndex interface_to(NodeId node, NodeId neighbor) const;

  friend bool operator==(const Topology& x, const Topology& y) { return x.links_ == y.links_ && x.adjacency_.size() == y.adjacency_.size(); }

 private:
  std::vector<Link> links_;  // sorted by (min endpoint, max endpoint)
  std::vector<std::vector<Interface>> adjacency_;
};

// Components via BFS from node 0. Used for validation and repair.
bool is_connected(std::size_t node_count, std::span<const Link> links);

Topology generate_tree(std::size_t node_count, std::size_t max_children, CostRange costs, std::uint64_t seed);

Topology generate_clique_grid(std::size_t rows, std::size_t cols, CostRange costs, std::uint64_t seed);

// Direct source->sink link plus a chain source - f1 - ... - fn - sink whose
// total cost is chain_cost. Each fulcrum fi carries a ring of loop_size extra
// nodes whose only attachment to the rest of the graph is fi. Node 0 is the
// source, the last node is the sink; fulcrum i is 1 + i * (loop_size + 1).
struct VelcroSpec {
  double main_cost = 10.0;
  double chain_cost = 3.0;
  std::size_t fulcrum_count = 3;
  std::size_t loop_size = 5;
  double loop_link_cost = 1.0;
};

Topology generate_velcro(const VelcroSpec& spec);

// Positions of the velcro's fulcrums and their ring members.
struct VelcroLayout {
  NodeId source = 0;
  NodeId sink = 0;
  std::vector<NodeId> fulcrums;
  std::vector<std::vector<NodeId>> rings;  // rings[i] belongs to fulcrums[i]
};

VelcroLayout velcro_layout(const VelcroSpec& spec);

enum class CostMode { Uniform, Distance };

// Nodes are placed uniformly on a plane_size square; a pair at distance d is
// weighted alpha * exp(-d / (beta * L)) with L the square's diagonal.
//
// links_per_node > 0 grows the graph one node at a time, each newcomer
// linking to that many distinct earlier nodes drawn by Waxman weight (the
// router-level incremental model). links_per_node == 0 samples every pair
// independently with the Waxman probability and then joins components by
// shortest inter-component distance.
struct WaxmanSpec {
  std::size_t node_count = 20;
  double alpha = 0.15;
  double beta = 0.2;
  double plane_size = 1000.0;
  std::size_t links_per_node = 2;
  CostMode cost_mode = CostMode::Uniform;
  CostRange costs{1.0, 1.0};
  std::uint64_t seed = 1;
};

Topology generate_waxman(const WaxmanSpec& spec);

// Line-oriented text format: "nodes N" then "link a b cost_ab cost_ba".
Topology parse_topology(std::string_view text);
std::string serialize_topology(const Topology& topology);

Topology load_topology(const std::string& path);
void save_topology(const Topology& topology, const std::string& path);

// Shortest round-trip decimal representation of a double.
std::string format_number(double value);

}  // namespace antroute
