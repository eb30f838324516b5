#include "antroute/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <thread>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

// Runs job(i) for i in [0, count) on a small pool. The first exception wins.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<OperatingPoint> operating_curve(const Topology& topology, std::span<const double> tau_grid, const SimConfig& sim,
                                            const TrafficConfig& traffic, const OperatingCurveOptions& options) {
  if (tau_grid.empty()) throw ParameterError("tau grid is empty");
  for (double tau : tau_grid)
    if (!(tau > 0.0 && tau <= 1.0)) throw ParameterError("tau values must be in (0, 1]");
  validate(sim);

  std::vector<OperatingPoint> out(tau_grid.size());
  parallel_for(tau_grid.size(), options.workers, [&](std::size_t i) {
    SimConfig cfg = sim;
    cfg.params.tau = tau_grid[i];
    const auto explored = run_exploration(topology, cfg);
    const auto traffic_result = run_traffic_experiment(topology, explored.tables, traffic);
    const auto& m = traffic_result.metrics;
    auto& p = out[i];
    p.tau = tau_grid[i];
    p.loop_pct = m.loop_pct();
    p.multipath_pct = m.multipath_pct();
    p.success_pct = m.success_pct();
    p.ttl_drop_pct = m.ttl_drop_pct();
    p.fallback_fraction = explored.stats.fallback_fraction();
    p.model_in_force = p.fallback_fraction < options.in_force_epsilon;
  });
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint64_t>> loop_frequency_histogram(const TrafficMetrics& metrics) {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> out;
  const std::uint32_t top = metrics.loop_histogram.empty() ? 0 : metrics.loop_histogram.rbegin()->first;
  for (std::uint32_t k = 0; k <= top; ++k) {
    auto it = metrics.loop_histogram.find(k);
    out.emplace_back(k, it == metrics.loop_histogram.end() ? 0 : it->second);
  }
  return out;
}

std::vector<ShortestPath> dijkstra_oracle(const Topology& topology, NodeId source) {
  const auto n = topology.node_count();
  if (source >= n) throw ParameterError("oracle source outside topology");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<ShortestPath> best(n, {inf, std::numeric_limits<std::uint32_t>::max()});
  using Entry = std::pair<std::pair<double, std::uint32_t>, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  best[source] = {0.0, 0};
  heap.push({{0.0, 0}, source});
  while (!heap.empty()) {
    const auto [key, u] = heap.top();
    heap.pop();
    if (key.first != best[u].cost || key.second != best[u].hops) continue;
    for (const auto& iface : topology.interfaces(u)) {
      const double c = key.first + iface.out_cost;
      const std::uint32_t h = key.second + 1;
      auto& b = best[iface.neighbor];
      if (c < b.cost || (c == b.cost && h < b.hops)) {
        b = {c, h};
        heap.push({{c, h}, iface.neighbor});
      }
    }
  }
  return best;
}

double kappa_lower_bound() { return 1.0 / std::log(3.0); }

double theoretical_path_length(double node_count, double kappa) {
  if (!(node_count >= 2.0) || !std::isfinite(node_count)) throw DomainError("path length needs N >= 2");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive and finite");
  const double e = std::expm1(1.0 / kappa);
  if (!(e < 2.0)) throw DomainError("kappa must exceed 1/ln 3 (e^(1/kappa) - 1 < 2)");
  const double a = std::log(e);
  return 1.0 + (std::log(node_count) + a) / (std::log(2.0) - a);
}

double kappa_from_length(double node_count, double length) {
  if (!(node_count >= 2.0) || !std::isfinite(node_count)) throw DomainError("kappa inverse needs N >= 2");
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("kappa inverse needs a positive finite length");
  const double a = ((length - 1.0) * std::log(2.0) - std::log(node_count)) / length;
  return 1.0 / std::log1p(std::exp(a));
}

FitResult fit_kappa(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) throw ParameterError("kappa fit needs at least three samples");
  const bool spread = std::any_of(samples.begin(), samples.end(), [&](const auto& s) { return s.first != samples.front().first; });
  if (!spread) throw ParameterError("kappa fit needs at least two distinct node counts");
  for (const auto& [n, l] : samples)
    if (!(n >= 2.0) || !std::isfinite(l)) throw ParameterError("kappa fit samples need N >= 2 and finite lengths");

  auto ssr = [&](double kappa) {
    double s = 0.0;
    for (const auto& [n, l] : samples) {
      const double r = l - theoretical_path_length(n, kappa);
      s += r * r;
    }
    return s;
  };

  // Coarse scan over kappa = kmin + e^t, then golden section on the bracket.
  const double kmin = kappa_lower_bound();
  const double t_lo = std::log(1e-9), t_hi = std::log(1e4);
  constexpr int grid = 2000;
  auto at = [&](int i) { return kmin + std::exp(t_lo + (t_hi - t_lo) * i / grid); };
  int best = 0;
  double best_val = ssr(at(0));
  for (int i = 1; i <= grid; ++i) {
    const double v = ssr(at(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == grid)
    throw FitError("kappa optimum lies on the domain edge (kappa " + format_number(at(best)) + ", residual " + format_number(best_val) + ")");

  double lo = at(best - 1), hi = at(best + 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = ssr(x1), f2 = ssr(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = ssr(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = ssr(x2);
    }
  }

  FitResult out;
  out.kappa = f1 < f2 ? x1 : x2;
  out.residual_sum_squares = ssr(out.kappa);
  double mean = 0.0;
  for (const auto& s : samples) mean += s.second;
  mean /= static_cast<double>(samples.size());
  double tot = 0.0;
  for (const auto& s : samples) tot += (s.second - mean) * (s.second - mean);
  out.r_squared = tot > 0.0 ? std::clamp(1.0 - out.residual_sum_squares / tot, 0.0, 1.0) : (out.residual_sum_squares == 0.0 ? 1.0 : 0.0);
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("spearman needs two equal-length series of size >= 2");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

ShortestPathMeasurement measure_avg_shortest_path(const Topology& topology, std::span<const RoutingTable> tables, std::uint32_t ttl) {
  const auto n = topology.node_count();
  if (tables.size() != n) throw ValidationError("routing tables do not match topology node count");
  TrafficConfig cfg;
  cfg.phi = 1;
  cfg.source_absorption = false;
  cfg.ttl = ttl;

  ShortestPathMeasurement out;
  double hops = 0.0, oracle_hops = 0.0;
  Rng rng(0);  // phi = 1 never draws
  for (NodeId s = 0; s < n; ++s) {
    const auto oracle = dijkstra_oracle(topology, s);
    for (NodeId d = 0; d < n; ++d) {
      if (s == d) continue;
      ++out.pairs;
      oracle_hops += oracle[d].hops;
      const auto r = route_packet(s, d, tables, topology, cfg, rng);
      if (r.outcome != RouteOutcome::Delivered) {
        ++out.deficiencies;
        continue;
      }
      ++out.delivered;
      const auto& trace = r.packet.path_trace;
      hops += static_cast<double>(trace.size() - 1);
      if (path_cost(topology, trace) > oracle[d].cost * (1.0 + 1e-12) + 1e-12) ++out.deficiencies;
    }
  }
  if (out.delivered > 0) out.average_hops = hops / static_cast<double>(out.delivered);
  if (out.pairs > 0) out.oracle_average_hops = oracle_hops / static_cast<double>(out.pairs);
  return out;
}

FitExperimentResult run_fit_experiment(const FitExperimentConfig& config) {
  if (config.sizes.empty() || config.topologies_per_size == 0) throw ParameterError("fit experiment needs sizes and at least one topology per size");
  const std::size_t reps = config.topologies_per_size;
  struct Run {
    ShortestPathMeasurement m;
    double degree = 0.0;
  };
  std::vector<Run> runs(config.sizes.size() * reps);
  parallel_for(runs.size(), config.workers, [&](std::size_t i) {
    const auto n = config.sizes[i / reps];
    const auto rep = i % reps;
    WaxmanSpec w = config.waxman;
    w.node_count = n;
    w.seed = derive_seed({config.seed, n, rep, 0});
    SimConfig sim = config.sim;
    sim.seed = derive_seed({config.seed, n, rep, 1});
    const auto topo = generate_waxman(w);
    const auto explored = run_exploration(topo, sim);
    runs[i].m = measure_avg_shortest_path(topo, explored.tables);
    runs[i].degree = 2.0 * static_cast<double>(topo.links().size()) / static_cast<double>(n);
  });

  FitExperimentResult out;
  std::vector<std::pair<double, double>> samples;
  for (std::size_t s = 0; s < config.sizes.size(); ++s) {
    SizeMeasurement sm;
    sm.node_count = config.sizes[s];
    sm.runs = reps;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& run = runs[s * reps + r];
      sm.average_hops += run.m.average_hops / static_cast<double>(reps);
      sm.oracle_average_hops += run.m.oracle_average_hops / static_cast<double>(reps);
      sm.average_degree += run.degree / static_cast<double>(reps);
      sm.deficiencies += run.m.deficiencies;
      sm.pairs += run.m.pairs;
    }
    samples.emplace_back(static_cast<double>(sm.node_count), sm.average_hops);
    out.per_size.push_back(sm);
  }
  out.fit = fit_kappa(samples);
  return out;
}

}  // namespace antroute
