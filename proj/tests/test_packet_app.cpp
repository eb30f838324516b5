#include <doctest.h>

#include <numeric>
#include <set>

#include "antroute/errors.hpp"
#include "antroute/packet_app.hpp"
#include "antroute/sim_engine.hpp"

using namespace antroute;

namespace {

// Tables that point every node at a fixed next hop per destination.
std::vector<RoutingTable> fixed_tables(const Topology& t, const std::vector<std::vector<NodeId>>& next_hop) {
  std::vector<RoutingTable> tables;
  for (NodeId n = 0; n < t.node_count(); ++n) {
    RoutingTable rt(t.node_count(), t.degree(n));
    for (NodeId d = 0; d < t.node_count(); ++d) {
      auto row = rt.row(d);
      std::fill(row.begin(), row.end(), 0.0);
      row[n == d ? 0 : t.interface_to(n, next_hop[n][d])] = 1.0;
    }
    tables.push_back(rt);
  }
  return tables;
}

}  // namespace

TEST_CASE("top phi distribution") {
  std::vector<double> row{0.4, 0.2, 0.15, 0.15};
  auto c = top_phi_distribution(row, 2);
  REQUIRE(c.size() == 2);
  CHECK(c[0].interface == 0);
  CHECK(c[0].probability == doctest::Approx(2.0 / 3));
  CHECK(c[1].interface == 1);
  CHECK(c[1].probability == doctest::Approx(1.0 / 3));

  auto one = top_phi_distribution(row, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].interface == 0);
  CHECK(one[0].probability == 1.0);

  std::vector<double> half{0.5, 0.5};
  auto h = top_phi_distribution(half, 5);
  REQUIRE(h.size() == 2);
  CHECK(h[0].probability == 0.5);

  auto tie = top_phi_distribution(row, 3);
  CHECK(tie[2].interface == 2);
  CHECK_THROWS_AS(top_phi_distribution(row, 0), ParameterError);

  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(1 + rng.uniform_index(7));
    for (auto& x : r) x = std::floor(rng.uniform01() * 4);
    for (std::size_t p = 1; p < r.size(); ++p) {
      auto small = top_phi_distribution(r, p), big = top_phi_distribution(r, p + 1);
      for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i].interface == big[i].interface);
    }
  }
}

TEST_CASE("stack loop counting") {
  Packet p;
  for (NodeId n : {0u, 1u, 2u}) record_visit(p, n);
  record_visit(p, 1);
  CHECK(p.loop_count == 1);
  CHECK(p.visited_stack == std::vector<NodeId>{0, 1});

  Packet q;
  record_visit(q, 0);
  record_visit(q, 3);
  CHECK(q.visited_stack == std::vector<NodeId>{0, 3});
  CHECK(q.loop_count == 0);

  Packet r;
  for (NodeId n : {0u, 1u, 2u, 1u, 3u}) record_visit(r, n);
  CHECK(r.loop_count == 1);
  CHECK(r.visited_stack == std::vector<NodeId>{0, 1, 3});
  CHECK(r.path_trace == std::vector<NodeId>{0, 1, 2, 1, 3});
}

TEST_CASE("route outcomes") {
  auto two = Topology::build(2, {{0, 1, 1, 1}});
  std::vector<RoutingTable> t2{RoutingTable(2, 1), RoutingTable(2, 1)};
  TrafficConfig cfg;
  Rng rng(1);
  auto r = route_packet(0, 1, t2, two, cfg, rng);
  CHECK(r.outcome == RouteOutcome::Delivered);
  CHECK(r.packet.path_trace == std::vector<NodeId>{0, 1});
  CHECK(r.packet.ttl == kDefaultPacketTtl - 1);

  // Path 0 - 1 - 2 where node 1 bounces packets for 2 back to 0.
  auto line = Topology::build(3, {{0, 1, 1, 1}, {1, 2, 1, 1}});
  auto bounce = fixed_tables(line, {{0, 1, 1}, {0, 1, 0}, {1, 1, 2}});
  cfg.source_absorption = true;
  auto a = route_packet(0, 2, bounce, line, cfg, rng);
  CHECK(a.outcome == RouteOutcome::AbsorbedAtSource);
  cfg.source_absorption = false;
  cfg.ttl = 10;
  auto e = route_packet(0, 2, bounce, line, cfg, rng);
  CHECK(e.outcome == RouteOutcome::TtlExpired);
  CHECK(e.packet.ttl == 0);
  CHECK(e.packet.loop_count > 0);
}

TEST_CASE("traffic experiment on converged tables") {
  WaxmanSpec w;
  w.node_count = 20;
  w.seed = 2;
  auto topo = generate_waxman(w);
  SimConfig sim;
  sim.params.lambda = 0.01;
  auto explored = run_exploration(topo, sim);

  TrafficConfig one;
  one.packets_per_pair = 20;
  auto r1 = run_traffic_experiment(topo, explored.tables, one);
  CHECK(r1.metrics.success_pct() == 100.0);
  CHECK(r1.metrics.loop_pct() == 0.0);
  CHECK(r1.metrics.multipath_pct() == 0.0);
  for (const auto& [pair, paths] : r1.paths.pairs) CHECK(paths.size() == 1);

  TrafficConfig all;
  all.phi = topo.max_degree();
  all.source_absorption = false;
  all.packets_per_pair = 30;
  auto ra = run_traffic_experiment(topo, explored.tables, all);
  const auto& m = ra.metrics;
  CHECK(m.delivered + m.absorbed_at_source + m.ttl_drops == m.packets);
  CHECK(m.absorbed_at_source == 0);
  CHECK(m.success_pct() == doctest::Approx(100.0 - m.ttl_drop_pct()));
  std::uint64_t hist = 0;
  for (const auto& [k, c] : m.loop_histogram) hist += c;
  CHECK(hist == m.delivered + m.absorbed_at_source);
  std::uint64_t recorded = 0;
  for (const auto& [pair, paths] : ra.paths.pairs) {
    for (const auto& [seq, st] : paths) {
      recorded += st.frequency;
      CHECK(st.cost == path_cost(topo, seq));
      CHECK(seq.front() == pair.first);
      CHECK(seq.back() == pair.second);
    }
  }
  CHECK(recorded == m.delivered);
  auto buckets = traffic_distribution_buckets(ra.paths);
  CHECK(std::accumulate(buckets.frequency.begin(), buckets.frequency.end(), std::uint64_t{0}) == m.delivered);

  auto again = run_traffic_experiment(topo, explored.tables, all);
  CHECK(again.metrics.loop_histogram == m.loop_histogram);
  CHECK(again.paths.pairs == ra.paths.pairs);

  std::vector<RoutingTable> wrong(explored.tables.begin(), explored.tables.end() - 1);
  CHECK_THROWS_AS(run_traffic_experiment(topo, wrong, one), ValidationError);
}

TEST_CASE("loop-free delivered packets have no repeated nodes") {
  auto grid = generate_clique_grid(4, 4, {1, 1}, 1);
  SimConfig sim;
  sim.duration = 3'000'000;
  auto explored = run_exploration(grid, sim);
  TrafficConfig cfg;
  cfg.phi = 4;
  cfg.source_absorption = false;
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    auto r = route_packet(0, 15, explored.tables, grid, cfg, rng);
    if (r.outcome != RouteOutcome::Delivered || r.packet.loop_count > 0) continue;
    std::set<NodeId> seen(r.packet.path_trace.begin(), r.packet.path_trace.end());
    CHECK(seen.size() == r.packet.path_trace.size());
  }
}

TEST_CASE("decile buckets") {
  PathRecord single;
  single.pairs[{0, 1}][{0, 1}] = {7, 1.0};
  auto b = traffic_distribution_buckets(single);
  CHECK(b.frequency[0] == 7);
  CHECK(std::accumulate(b.frequency.begin() + 1, b.frequency.end(), std::uint64_t{0}) == 0);

  PathRecord two;
  two.pairs[{0, 2}][{0, 1, 2}] = {5, 2.0};
  two.pairs[{0, 2}][{0, 2}] = {5, 3.0};
  two.pairs[{1, 2}];
  auto c = traffic_distribution_buckets(two);
  CHECK(c.frequency[0] == 5);
  CHECK(c.frequency[5] == 5);
  CHECK(c.pairs_used == 1);
  CHECK(c.pairs_excluded == 1);

  PathRecord ten;
  for (std::uint64_t i = 0; i < 20; ++i) ten.pairs[{0, 1}][{0, static_cast<NodeId>(i + 2), 1}] = {i + 1, static_cast<double>(i)};
  auto d = traffic_distribution_buckets(ten);
  for (std::size_t k = 0; k < 10; ++k) CHECK(d.frequency[k] == (2 * k + 1) + (2 * k + 2));
}
