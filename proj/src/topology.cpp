#include "antroute/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "antroute/errors.hpp"
#include "antroute/random.hpp"

namespace antroute {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_cost_range(CostRange costs) {
  if (!(costs.min > 0.0) || !(costs.max >= costs.min) || !std::isfinite(costs.max))
    throw ParameterError("cost range must satisfy 0 < min <= max");
}

// Integral bounds draw integer costs; anything else draws a real in range.
double draw_cost(CostRange costs, Rng& rng) {
  if (costs.min == costs.max) return costs.min;
  const double lo = std::ceil(costs.min);
  const double hi = std::floor(costs.max);
  if (lo == costs.min && hi == costs.max) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<double>(rng.uniform_index(span));
  }
  return costs.min + (costs.max - costs.min) * rng.uniform01();
}

Link make_link(NodeId a, NodeId b, double cost_ab, double cost_ba) {
  if (a > b) {
    std::swap(a, b);
    std::swap(cost_ab, cost_ba);
  }
  return Link{a, b, cost_ab, cost_ba};
}

}  // namespace

bool is_connected(std::size_t node_count, std::span<const Link> links) {
  if (node_count == 0) return false;
  DisjointSets sets(node_count);
  std::size_t components = node_count;
  for (const auto& l : links)
    if (l.a < node_count && l.b < node_count && sets.unite(l.a, l.b)) --components;
  return components == 1;
}

Topology Topology::build(std::size_t node_count, std::vector<Link> links) {
  if (node_count < 2) throw ValidationError("topology needs at least 2 nodes");
  for (auto& l : links) {
    if (l.a >= node_count || l.b >= node_count)
      throw ValidationError("link " + std::to_string(l.a) + "-" + std::to_string(l.b) + " references a node outside [0, " +
                            std::to_string(node_count) + ")");
    if (l.a == l.b) throw ValidationError("self-link at node " + std::to_string(l.a));
    if (!(l.cost_ab > 0.0) || !(l.cost_ba > 0.0) || !std::isfinite(l.cost_ab) || !std::isfinite(l.cost_ba))
      throw ValidationError("link " + std::to_string(l.a) + "-" + std::to_string(l.b) + " has a non-positive cost");
    l = make_link(l.a, l.b, l.cost_ab, l.cost_ba);
  }
  std::sort(links.begin(), links.end(), [](const Link& x, const Link& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
  for (std::size_t i = 1; i < links.size(); ++i)
    if (links[i].a == links[i - 1].a && links[i].b == links[i - 1].b)
      throw ValidationError("duplicate link " + std::to_string(links[i].a) + "-" + std::to_string(links[i].b));
  if (!is_connected(node_count, links)) throw ValidationError("topology is not connected");

  Topology t;
  t.links_ = std::move(links);
  t.adjacency_.resize(node_count);
  for (std::size_t i = 0; i < t.links_.size(); ++i) {
    const auto& l = t.links_[i];
    t.adjacency_[l.a].push_back(Interface{l.b, i, l.cost_ab, l.cost_ba, 0});
    t.adjacency_[l.b].push_back(Interface{l.a, i, l.cost_ba, l.cost_ab, 0});
  }
  for (auto& ifaces : t.adjacency_)
    std::sort(ifaces.begin(), ifaces.end(), [](const Interface& x, const Interface& y) { return x.neighbor < y.neighbor; });
  for (NodeId n = 0; n < node_count; ++n)
    for (auto& iface : t.adjacency_[n]) iface.reverse = t.interface_to(iface.neighbor, n);
  return t;
}

std::size_t Topology::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& ifaces : adjacency_) d = std::max(d, ifaces.size());
  return d;
}

InterfaceIndex Topology::interface_to(NodeId node, NodeId neighbor) const {
  const auto& ifaces = adjacency_.at(node);
  auto it = std::lower_bound(ifaces.begin(), ifaces.end(), neighbor,
                             [](const Interface& i, NodeId n) { return i.neighbor < n; });
  if (it != ifaces.end() && it->neighbor == neighbor) return static_cast<InterfaceIndex>(it - ifaces.begin());
  return static_cast<InterfaceIndex>(ifaces.size());
}

Topology generate_tree(std::size_t node_count, std::size_t max_children, CostRange costs, std::uint64_t seed) {
  if (node_count < 2) throw ParameterError("tree needs node_count >= 2");
  if (max_children < 1) throw ParameterError("tree needs max_children >= 1");
  check_cost_range(costs);

  Rng rng(seed);
  std::vector<std::size_t> children(node_count, 0);
  std::vector<NodeId> open{0};  // nodes that can still take a child
  std::vector<Link> links;
  for (NodeId n = 1; n < node_count; ++n) {
    const auto pick = rng.uniform_index(open.size());
    const NodeId parent = open[pick];
    const double c1 = draw_cost(costs, rng);
    const double c2 = draw_cost(costs, rng);
    links.push_back(make_link(parent, n, c1, c2));
    if (++children[parent] == max_children) open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    open.push_back(n);
  }
  return Topology::build(node_count, std::move(links));
}

Topology generate_clique_grid(std::size_t rows, std::size_t cols, CostRange costs, std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw ParameterError("clique grid needs rows >= 2 and cols >= 2");
  check_cost_range(costs);

  Rng rng(seed);
  std::vector<Link> links;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        const double c1 = draw_cost(costs, rng);
        const double c2 = draw_cost(costs, rng);
        links.push_back(make_link(id(r, c), id(r, c + 1), c1, c2));
      }
      if (r + 1 < rows) {
        const double c1 = draw_cost(costs, rng);
        const double c2 = draw_cost(costs, rng);
        links.push_back(make_link(id(r, c), id(r + 1, c), c1, c2));
      }
    }
  }
  return Topology::build(rows * cols, std::move(links));
}

VelcroLayout velcro_layout(const VelcroSpec& spec) {
  if (spec.fulcrum_count < 1) throw ParameterError("velcro needs at least one fulcrum");
  if (spec.loop_size < 3) throw ParameterError("velcro loop_size must be >= 3");
  VelcroLayout layout;
  layout.source = 0;
  for (std::size_t i = 0; i < spec.fulcrum_count; ++i) {
    const auto f = static_cast<NodeId>(1 + i * (spec.loop_size + 1));
    layout.fulcrums.push_back(f);
    std::vector<NodeId> ring;
    for (std::size_t r = 1; r <= spec.loop_size; ++r) ring.push_back(static_cast<NodeId>(f + r));
    layout.rings.push_back(std::move(ring));
  }
  layout.sink = static_cast<NodeId>(1 + spec.fulcrum_count * (spec.loop_size + 1));
  return layout;
}

Topology generate_velcro(const VelcroSpec& spec) {
  if (!(spec.main_cost > 0.0) || !(spec.chain_cost > 0.0) || !(spec.loop_link_cost > 0.0))
    throw ParameterError("velcro costs must be positive");
  const auto layout = velcro_layout(spec);

  std::vector<Link> links;
  auto sym = [&links](NodeId a, NodeId b, double c) { links.push_back(make_link(a, b, c, c)); };
  sym(layout.source, layout.sink, spec.main_cost);

  const double hop = spec.chain_cost / static_cast<double>(spec.fulcrum_count + 1);
  NodeId prev = layout.source;
  for (std::size_t i = 0; i < layout.fulcrums.size(); ++i) {
    const NodeId f = layout.fulcrums[i];
    sym(prev, f, hop);
    const auto& ring = layout.rings[i];
    sym(f, ring.front(), spec.loop_link_cost);
    for (std::size_t r = 1; r < ring.size(); ++r) sym(ring[r - 1], ring[r], spec.loop_link_cost);
    sym(ring.back(), f, spec.loop_link_cost);
    prev = f;
  }
  sym(prev, layout.sink, hop);
  return Topology::build(layout.sink + 1, std::move(links));
}

Topology generate_waxman(const WaxmanSpec& spec) {
  if (spec.node_count < 2) throw ParameterError("waxman needs node_count >= 2");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw ParameterError("waxman alpha must be in (0, 1]");
  if (!(spec.beta > 0.0 && spec.beta <= 1.0)) throw ParameterError("waxman beta must be in (0, 1]");
  if (!(spec.plane_size > 0.0)) throw ParameterError("waxman plane_size must be positive");
  if (spec.cost_mode == CostMode::Uniform) check_cost_range(spec.costs);

  const std::size_t n = spec.node_count;
  Rng rng(spec.seed);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = spec.plane_size * rng.uniform01();
    ys[i] = spec.plane_size * rng.uniform01();
  }
  auto dist = [&](std::size_t i, std::size_t j) { return std::hypot(xs[i] - xs[j], ys[i] - ys[j]); };
  const double max_dist = spec.plane_size * std::sqrt(2.0);

  auto weight = [&](std::size_t i, std::size_t j) { return spec.alpha * std::exp(-dist(i, j) / (spec.beta * max_dist)); };

  std::vector<std::pair<NodeId, NodeId>> edges;
  if (spec.links_per_node > 0) {
    std::vector<double> w;
    for (std::size_t i = 1; i < n; ++i) {
      w.assign(i, 0.0);
      for (std::size_t j = 0; j < i; ++j) w[j] = weight(i, j);
      const std::size_t picks = std::min(spec.links_per_node, i);
      for (std::size_t c = 0; c < picks; ++c) {
        double total = 0.0;
        for (double v : w) total += v;
        const double u = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = i;
        for (std::size_t j = 0; j < i; ++j) {
          if (w[j] <= 0.0) continue;
          acc += w[j];
          pick = j;
          if (u < acc) break;
        }
        w[pick] = 0.0;
        edges.emplace_back(static_cast<NodeId>(pick), static_cast<NodeId>(i));
      }
    }
  } else {
    std::vector<std::pair<NodeId, NodeId>> rejected;
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.uniform01() < weight(i, j)) {
          edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
          sets.unite(i, j);
        } else {
          rejected.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
      }
    }
    // Repair: join components with the shortest inter-component pairs first.
    std::stable_sort(rejected.begin(), rejected.end(),
                     [&](const auto& x, const auto& y) { return dist(x.first, x.second) < dist(y.first, y.second); });
    for (const auto& [i, j] : rejected)
      if (sets.unite(i, j)) edges.emplace_back(i, j);
  }
  std::sort(edges.begin(), edges.end());

  std::vector<Link> links;
  links.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    if (spec.cost_mode == CostMode::Distance) {
      const double c = std::max(1.0, std::ceil(dist(i, j)));
      links.push_back(Link{i, j, c, c});
    } else {
      const double c1 = draw_cost(spec.costs, rng);
      const double c2 = draw_cost(spec.costs, rng);
      links.push_back(Link{i, j, c1, c2});
    }
  }
  return Topology::build(n, std::move(links));
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

template <typename T>
T parse_field(std::string_view token, std::size_t line, const char* what) {
  T value{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Topology parse_topology(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t node_count = 0;
  bool have_header = false;
  std::vector<Link> links;
  std::set<std::pair<NodeId, NodeId>> seen;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (!have_header) {
      if (tok[0] != "nodes" || tok.size() != 2) throw ParseError(line_no, "expected 'nodes <N>'");
      node_count = parse_field<std::size_t>(tok[1], line_no, "node count");
      have_header = true;
      continue;
    }
    if (tok[0] != "link" || tok.size() != 5) throw ParseError(line_no, "expected 'link <a> <b> <cost_ab> <cost_ba>'");
    const auto a = parse_field<NodeId>(tok[1], line_no, "node id");
    const auto b = parse_field<NodeId>(tok[2], line_no, "node id");
    const auto cab = parse_field<double>(tok[3], line_no, "cost");
    const auto cba = parse_field<double>(tok[4], line_no, "cost");
    if (a >= node_count || b >= node_count) throw ParseError(line_no, "node id out of range");
    if (a == b) throw ValidationError("line " + std::to_string(line_no) + ": self-link at node " + std::to_string(a));
    if (!(cab > 0.0) || !(cba > 0.0)) throw ValidationError("line " + std::to_string(line_no) + ": costs must be positive");
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate link " + std::to_string(a) + "-" + std::to_string(b));
    links.push_back(Link{a, b, cab, cba});
  }
  if (!have_header) throw ParseError(line_no, "missing 'nodes <N>' header");
  return Topology::build(node_count, std::move(links));
}

std::string serialize_topology(const Topology& topology) {
  std::ostringstream out;
  out << "nodes " << topology.node_count() << '\n';
  for (const auto& l : topology.links())
    out << "link " << l.a << ' ' << l.b << ' ' << format_number(l.cost_ab) << ' ' << format_number(l.cost_ba) << '\n';
  return out.str();
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open topology file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

void save_topology(const Topology& topology, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write topology file '" + path + "'");
  out << serialize_topology(topology);
}

}  // namespace antroute
