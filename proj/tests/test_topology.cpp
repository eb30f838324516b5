#include <doctest.h>

#include <map>
#include <queue>
#include <set>

#include "antroute/errors.hpp"
#include "antroute/topology.hpp"

using namespace antroute;

namespace {

// Independent reachability oracle over the raw link list.
std::size_t reachable_from_zero(std::size_t n, const std::vector<Link>& links, NodeId skip = UINT32_MAX) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& l : links) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  std::vector<bool> seen(n, false);
  std::queue<NodeId> q;
  NodeId start = skip == 0 ? 1 : 0;
  seen[start] = true;
  q.push(start);
  std::size_t count = 1;
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : adj[u])
      if (v != skip && !seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
  }
  return count;
}

std::map<std::size_t, std::size_t> degree_multiset(const Topology& t) {
  std::map<std::size_t, std::size_t> m;
  for (NodeId i = 0; i < t.node_count(); ++i) ++m[t.degree(i)];
  return m;
}

}  // namespace

TEST_CASE("tree generator") {
  auto t2 = generate_tree(2, 1, {1, 1}, 9);
  REQUIRE(t2.links().size() == 1);
  CHECK(t2.links()[0] == Link{0, 1, 1.0, 1.0});

  auto t5 = generate_tree(5, 2, {1, 1}, 42);
  CHECK(t5.node_count() == 5);
  CHECK(t5.links().size() == 4);
  CHECK(reachable_from_zero(5, t5.links()) == 5);

  CHECK_THROWS_AS(generate_tree(1, 1, {1, 1}, 1), ParameterError);
  CHECK_THROWS_AS(generate_tree(5, 0, {1, 1}, 1), ParameterError);
  CHECK_THROWS_AS(generate_tree(5, 2, {3, 1}, 1), ParameterError);
  CHECK_THROWS_AS(generate_tree(5, 2, {0, 1}, 1), ParameterError);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto t = generate_tree(30, 3, {1, 9}, seed);
    CHECK(t.links().size() == 29);
    CHECK(reachable_from_zero(30, t.links()) == 30);
    for (const auto& l : t.links()) {
      CHECK(l.cost_ab >= 1.0);
      CHECK(l.cost_ab <= 9.0);
      CHECK(l.cost_ab == static_cast<double>(static_cast<int>(l.cost_ab)));
    }
    CHECK(t == generate_tree(30, 3, {1, 9}, seed));
  }
}

TEST_CASE("clique grid degrees") {
  auto g = generate_clique_grid(2, 2, {1, 1}, 1);
  CHECK(degree_multiset(g) == std::map<std::size_t, std::size_t>{{2, 4}});

  auto g85 = generate_clique_grid(8, 5, {1, 1}, 1);
  CHECK(g85.node_count() == 40);
  CHECK(degree_multiset(g85)[4] == 18);

  auto g104 = generate_clique_grid(10, 4, {1, 1}, 1);
  CHECK(degree_multiset(g104) == std::map<std::size_t, std::size_t>{{2, 4}, {3, 20}, {4, 16}});

  for (std::size_t r = 2; r <= 7; ++r)
    for (std::size_t c = 2; c <= 7; ++c) {
      auto t = generate_clique_grid(r, c, {1, 1}, 1);
      std::map<std::size_t, std::size_t> expect;
      expect[2] = 4;
      if (r + c > 4) expect[3] = 2 * (r - 2) + 2 * (c - 2);
      if (r > 2 && c > 2) expect[4] = (r - 2) * (c - 2);
      CHECK(degree_multiset(t) == expect);
    }
  CHECK_THROWS_AS(generate_clique_grid(1, 5, {1, 1}, 1), ParameterError);
}

TEST_CASE("velcro structure") {
  VelcroSpec spec;
  auto v = generate_velcro(spec);
  auto layout = velcro_layout(spec);
  CHECK(v.node_count() == 20);
  CHECK(layout.fulcrums == std::vector<NodeId>{1, 7, 13});
  CHECK(layout.sink == 19);

  // Direct link carries main_cost; chain hops sum to chain_cost.
  const auto direct = v.interface_to(layout.source, layout.sink);
  REQUIRE(direct < v.degree(layout.source));
  CHECK(v.interface(layout.source, direct).out_cost == doctest::Approx(10.0));
  std::vector<NodeId> chain{layout.source};
  chain.insert(chain.end(), layout.fulcrums.begin(), layout.fulcrums.end());
  chain.push_back(layout.sink);
  double total = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const auto k = v.interface_to(chain[i - 1], chain[i]);
    REQUIRE(k < v.degree(chain[i - 1]));
    total += v.interface(chain[i - 1], k).out_cost;
  }
  CHECK(total == doctest::Approx(3.0));

  // Each ring touches the rest of the graph only through its fulcrum.
  for (std::size_t i = 0; i < layout.fulcrums.size(); ++i) {
    const auto f = layout.fulcrums[i];
    const std::set<NodeId> ring(layout.rings[i].begin(), layout.rings[i].end());
    CHECK(ring.size() == spec.loop_size);
    for (auto r : ring)
      for (const auto& iface : v.interfaces(r)) CHECK((ring.count(iface.neighbor) || iface.neighbor == f));
    CHECK(reachable_from_zero(v.node_count(), v.links(), f) < v.node_count() - 1);
  }

  VelcroSpec cheap_direct{3.0, 10.0, 3, 5, 1.0};
  auto c = generate_velcro(cheap_direct);
  CHECK(c.interface(0, c.interface_to(0, velcro_layout(cheap_direct).sink)).out_cost < 10.0);

  CHECK_NOTHROW(generate_velcro({1.0, 1.0, 1, 3, 1.0}));
  CHECK_THROWS_AS(generate_velcro({10.0, 3.0, 0, 5, 1.0}), ParameterError);
  CHECK_THROWS_AS(generate_velcro({10.0, 3.0, 3, 2, 1.0}), ParameterError);
}

TEST_CASE("waxman generator") {
  WaxmanSpec two;
  two.node_count = 2;
  two.alpha = 1.0;
  two.beta = 1.0;
  two.plane_size = 100;
  for (std::size_t m : {0u, 2u}) {
    two.links_per_node = m;
    auto t = generate_waxman(two);
    CHECK(t.links().size() == 1);
  }

  WaxmanSpec w40;
  w40.node_count = 40;
  w40.seed = 7;
  auto t40 = generate_waxman(w40);
  CHECK(t40.node_count() == 40);
  CHECK(reachable_from_zero(40, t40.links()) == 40);
  CHECK(t40 == generate_waxman(w40));

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    WaxmanSpec w;
    w.node_count = 20;
    w.seed = seed;
    auto t = generate_waxman(w);
    const double avg = 2.0 * static_cast<double>(t.links().size()) / 20.0;
    CHECK(avg >= 2.0);
    CHECK(avg <= 8.0);
    w.links_per_node = 0;
    CHECK(reachable_from_zero(20, generate_waxman(w).links()) == 20);
  }

  WaxmanSpec dist = w40;
  dist.cost_mode = CostMode::Distance;
  const auto by_distance = generate_waxman(dist);
  for (const auto& l : by_distance.links()) {
    CHECK(l.cost_ab >= 1.0);
    CHECK(l.cost_ab == l.cost_ba);
  }

  WaxmanSpec bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(generate_waxman(bad), ParameterError);
  bad = {};
  bad.beta = 1.5;
  CHECK_THROWS_AS(generate_waxman(bad), ParameterError);
  bad = {};
  bad.node_count = 1;
  CHECK_THROWS_AS(generate_waxman(bad), ParameterError);
}

TEST_CASE("topology file parsing") {
  auto t = parse_topology("nodes 2\nlink 0 1 5 5\n");
  CHECK(t.node_count() == 2);
  CHECK(t.interface(0, 0).out_cost == 5.0);
  CHECK(t.interface(1, 0).out_cost == 5.0);

  auto a = parse_topology("# comment\nnodes 3\nlink 2 0 3 7 # trailing\nlink 1 0 1.5 2\n");
  CHECK(a.links()[0] == Link{0, 1, 2.0, 1.5});
  CHECK(a.links()[1] == Link{0, 2, 7.0, 3.0});
  CHECK(a.interface(0, 1).neighbor == 2);
  CHECK(a.interface(0, 1).out_cost == 7.0);
  CHECK(a.interface(0, 1).in_cost == 3.0);
  CHECK(a.interface(2, a.interface(0, 1).reverse).neighbor == 0);

  CHECK_THROWS_AS(parse_topology("nodes 2\nlink 0 0 1 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_topology("nodes 3\nlink 0 1 1 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_topology("nodes 2\nlink 0 1 1 1\nlink 1 0 1 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_topology("nodes 2\nlink 0 1 0 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_topology("nodes 2\nlink 0 5 1 1\n"), ValidationError);
  try {
    parse_topology("nodes 2\n\nlink 0 1 x 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_topology("link 0 1 1 1\n"), ParseError);

  auto grid = generate_clique_grid(8, 5, {1, 4}, 3);
  auto back = parse_topology(serialize_topology(grid));
  CHECK(back == grid);
  for (NodeId i = 0; i < grid.node_count(); ++i) {
    REQUIRE(back.degree(i) == grid.degree(i));
    for (InterfaceIndex k = 0; k < grid.degree(i); ++k) {
      CHECK(back.interface(i, k).neighbor == grid.interface(i, k).neighbor);
      CHECK(back.interface(i, k).out_cost == grid.interface(i, k).out_cost);
      CHECK(back.interface(i, k).reverse == grid.interface(i, k).reverse);
    }
  }
}

TEST_CASE("interface reverse consistency") {
  WaxmanSpec w;
  w.node_count = 30;
  w.seed = 11;
  auto t = generate_waxman(w);
  for (NodeId i = 0; i < t.node_count(); ++i) {
    NodeId prev = 0;
    for (InterfaceIndex k = 0; k < t.degree(i); ++k) {
      const auto& f = t.interface(i, k);
      if (k > 0) CHECK(f.neighbor > prev);
      prev = f.neighbor;
      const auto& r = t.interface(f.neighbor, f.reverse);
      CHECK(r.neighbor == i);
      CHECK(r.link == f.link);
      CHECK(r.out_cost == f.in_cost);
    }
  }
}
