#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "antroute/ant_core.hpp"
#include "antroute/packet_app.hpp"
#include "antroute/sim_engine.hpp"
#include "antroute/topology.hpp"

namespace antroute {

// Fallback share below which the statistical model is considered in force.
inline constexpr double kDefaultInForceEpsilon = 0.001;

struct OperatingPoint {
  double tau = 0.0;
  double loop_pct = 0.0;
  double multipath_pct = 0.0;
  double success_pct = 0.0;
  double ttl_drop_pct = 0.0;
  double fallback_fraction = 0.0;
  bool model_in_force = false;
};

struct OperatingCurveOptions {
  double in_force_epsilon = kDefaultInForceEpsilon;
  std::size_t workers = 0;  // 0 picks the hardware concurrency
};

// One exploration plus one traffic run per tau, same seeds for every point.
// The result is ordered as tau_grid regardless of worker scheduling.
std::vector<OperatingPoint> operating_curve(const Topology& topology, std::span<const double> tau_grid, const SimConfig& sim,
                                            const TrafficConfig& traffic, const OperatingCurveOptions& options = {});

// (k, packets with exactly k loops) for k = 0 .. max observed, gaps filled with 0.
std::vector<std::pair<std::uint32_t, std::uint64_t>> loop_frequency_histogram(const TrafficMetrics& metrics);

struct ShortestPath {
  double cost = 0.0;
  std::uint32_t hops = 0;  // fewest hops among minimum-cost paths
};

// Dijkstra over forward costs from `source` to every node.
std::vector<ShortestPath> dijkstra_oracle(const Topology& topology, NodeId source);

// l(N, kappa) = 1 + (ln N + A) / (ln 2 - A) with A = ln(e^(1/kappa) - 1).
// Defined for N >= 2 and e^(1/kappa) - 1 < 2, i.e. kappa > 1 / ln 3.
double theoretical_path_length(double node_count, double kappa);

// Exact inverse of theoretical_path_length in kappa. Defined for N >= 2, l > 0.
double kappa_from_length(double node_count, double length);

// Smallest kappa accepted by theoretical_path_length.
double kappa_lower_bound();

struct FitResult {
  double kappa = 0.0;
  double r_squared = 0.0;
  double residual_sum_squares = 0.0;
};

// Least-squares kappa for (N, measured length) samples. Needs at least three
// samples spanning at least two distinct N. Throws FitError if the optimum
// sits on the edge of the searchable domain.
FitResult fit_kappa(std::span<const std::pair<double, double>> samples);

// Pearson correlation of average ranks (ties share their mean rank).
double spearman_correlation(std::span<const double> x, std::span<const double> y);

struct ShortestPathMeasurement {
  double average_hops = 0.0;         // over delivered pairs
  double oracle_average_hops = 0.0;  // over all pairs
  std::size_t pairs = 0;
  std::size_t delivered = 0;
  std::size_t deficiencies = 0;  // undelivered, or delivered over a costlier path than the oracle's
};

// Routes one packet per ordered pair at phi = 1 without source absorption.
ShortestPathMeasurement measure_avg_shortest_path(const Topology& topology, std::span<const RoutingTable> tables,
                                                  std::uint32_t ttl = kDefaultPacketTtl);

struct SizeMeasurement {
  std::size_t node_count = 0;
  std::size_t runs = 0;
  double average_hops = 0.0;
  double oracle_average_hops = 0.0;
  double average_degree = 0.0;
  std::size_t deficiencies = 0;
  std::size_t pairs = 0;
};

struct FitExperimentConfig {
  std::vector<std::size_t> sizes{20, 40, 60, 80, 100};
  std::size_t topologies_per_size = 1;
  WaxmanSpec waxman;  // node_count and seed are set per run
  SimConfig sim;      // seed is set per run
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

struct FitExperimentResult {
  std::vector<SizeMeasurement> per_size;
  FitResult fit;
};

// Generates topologies of each size, explores them, measures phi = 1 path
// lengths and fits kappa to the per-size means.
FitExperimentResult run_fit_experiment(const FitExperimentConfig& config);

}  // namespace antroute
