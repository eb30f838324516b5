#include "antroute/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "antroute/analytics.hpp"
#include "antroute/errors.hpp"
#include "antroute/packet_app.hpp"
#include "antroute/sim_engine.hpp"
#include "antroute/table_io.hpp"
#include "antroute/topology.hpp"

#ifndef ANTROUTE_VERSION
#define ANTROUTE_VERSION "0.0.0"
#endif

namespace antroute {

namespace {

using json = nlohmann::ordered_json;

std::string strip_suffix(const std::string& path, std::string_view suffix) {
  if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return path.substr(0, path.size() - suffix.size());
  return path;
}

std::string stem_of(const std::string& path) { return strip_suffix(strip_suffix(path, ".csv"), ".topo"); }

std::string base_name(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Collects what a command read and wrote, then writes the manifest next to
// the primary output.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv, std::string path) : path_(std::move(path)) {
    doc_["tool"] = "antroute";
    doc_["version"] = ANTROUTE_VERSION;
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
  }

  const std::string& path() const { return path_; }
  std::string ref() const { return base_name(path_); }

  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void parameters(json p) { doc_["parameters"] = std::move(p); }
  void input(const std::string& path) { inputs_.push_back({{"path", path}, {"fnv1a64", fnv1a_hex(read_file(path))}}); }
  void output(const std::string& path) { outputs_.push_back({{"path", path}, {"fnv1a64", fnv1a_hex(read_file(path))}}); }

  void write() {
    doc_["inputs"] = inputs_;
    doc_["outputs"] = outputs_;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path_);
    out << doc_.dump(2) << '\n';
  }

 private:
  std::string path_;
  json doc_;
  json inputs_ = json::array();
  json outputs_ = json::array();
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

json collect_parameters(const CLI::App* app) {
  json p = json::object();
  for (const auto* opt : app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      std::string joined;
      for (std::size_t i = 0; i < r.size(); ++i) joined += (i ? "," : "") + r[i];
      p[name] = joined;
    } else {
      p[name] = opt->get_default_str();
    }
  }
  return p;
}

// Expands "--config file" into "--key value" pairs for keys not already
// given on the command line. Lines are key=value; '#' starts a comment.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config) return out;
  std::set<std::string> given;
  for (const auto& a : out)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

  std::istringstream in(read_file(*config));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value in " + *config);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key in " + *config);
    if (given.count(key)) continue;
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

const std::map<std::string, AntPolicy> kPolicies{{"model", AntPolicy::ModelBased}, {"uniform", AntPolicy::UniformAnts}, {"regular", AntPolicy::RegularAnts}};
const std::map<std::string, CostFunction> kCostFns{{"linear", CostFunction::Linear}, {"quadratic", CostFunction::Quadratic}};
const std::map<std::string, bool> kOnOff{{"on", true}, {"off", false}};
const std::map<std::string, CostMode> kCostModes{{"uniform", CostMode::Uniform}, {"distance", CostMode::Distance}};

// Accepts times such as 1e8 for integer microsecond options.
const CLI::Validator kTimeValue(
    [](std::string& s) -> std::string {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        return "not a number: " + s;
      }
      if (used != s.size() || !(v >= 0.0) || v > 9.0e18 || v != std::floor(v)) return "expected a non-negative whole number of microseconds: " + s;
      s = std::to_string(static_cast<std::int64_t>(v));
      return {};
    },
    "TIME");

struct ExploreFlags {
  SimConfig sim;
  std::string policy = "model";
  std::string subpath = "on";
  std::string cost_fn = "quadratic";
  std::string no_return = "on";
};

void add_explore_flags(CLI::App* app, ExploreFlags& f) {
  app->add_option("--tau", f.sim.params.tau, "Eligibility threshold on returned/sent")->check(CLI::Range(0.0, 1.0));
  app->add_option("--duration", f.sim.duration, "Simulated time in microseconds")->transform(kTimeValue);
  app->add_option("--ant-period", f.sim.ant_period, "Ant generation period per node in microseconds")->transform(kTimeValue);
  app->add_option("--uncontrolled-fraction", f.sim.uncontrolled_fraction, "Share of the run spent in uncontrolled exploration");
  app->add_option("--lambda", f.sim.params.lambda, "Reinforcement scale");
  app->add_option("--cost-fn", f.cost_fn, "Cost function f(c): linear or quadratic")->check(CLI::IsMember(kCostFns));
  app->add_option("--policy", f.policy, "model, uniform or regular")->check(CLI::IsMember(kPolicies));
  app->add_option("--subpath", f.subpath, "Sub-path reinforcement on|off")->check(CLI::IsMember(kOnOff));
  app->add_option("--no-return", f.no_return, "Controlled selection avoids the arrival interface on|off")->check(CLI::IsMember(kOnOff));
  app->add_option("--link-delay", f.sim.link_delay, "Per-link transit delay in microseconds")->transform(kTimeValue);
  app->add_option("--ant-max-hops", f.sim.ant_max_hops, "Drop ants after this many hops (0 = unlimited)");
}

SimConfig to_sim_config(const ExploreFlags& f, std::uint64_t seed) {
  SimConfig c = f.sim;
  c.policy = kPolicies.at(f.policy);
  c.subpath_reinforcement = kOnOff.at(f.subpath);
  c.params.cost_fn = kCostFns.at(f.cost_fn);
  c.params.controlled_no_return = kOnOff.at(f.no_return);
  c.seed = seed;
  return c;
}

struct RouteFlags {
  TrafficConfig traffic;
  std::string phi = "1";
  std::string absorption = "on";
};

void add_route_flags(CLI::App* app, RouteFlags& f) {
  app->add_option("--phi", f.phi, "Reachability factor: a positive integer or 'max'");
  app->add_option("--absorption", f.absorption, "Destroy packets that return to their source on|off")->check(CLI::IsMember(kOnOff));
  app->add_option("--packets-per-pair", f.traffic.packets_per_pair, "Packets routed per ordered pair");
  app->add_option("--ttl", f.traffic.ttl, "Packet time to live")->check(CLI::Range(1u, 65535u));
  app->add_option("--all-pairs-limit", f.traffic.all_pairs_limit, "Route every pair up to this many nodes");
  app->add_option("--sampled-pairs", f.traffic.sampled_pairs, "Pairs sampled on larger topologies");
}

TrafficConfig to_traffic(const RouteFlags& f, const Topology& topo, std::uint64_t seed) {
  TrafficConfig t = f.traffic;
  if (f.phi == "max") {
    t.phi = topo.max_degree();
  } else {
    std::size_t phi = 0;
    std::size_t used = 0;
    try {
      phi = std::stoul(f.phi, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != f.phi.size() || phi < 1) throw ParameterError("--phi must be a positive integer or 'max'");
    t.phi = phi;
  }
  t.source_absorption = kOnOff.at(f.absorption);
  t.seed = seed;
  return t;
}

struct WaxmanFlags {
  WaxmanSpec spec;
  std::string cost_mode = "uniform";
};

void add_waxman_flags(CLI::App* app, WaxmanFlags& f, bool with_nodes) {
  if (with_nodes) app->add_option("--nodes", f.spec.node_count, "Number of nodes");
  app->add_option("--alpha", f.spec.alpha, "Waxman alpha");
  app->add_option("--beta", f.spec.beta, "Waxman beta");
  app->add_option("--plane-size", f.spec.plane_size, "Side of the placement square");
  app->add_option("--links-per-node", f.spec.links_per_node, "Links added per new node (0 = independent pairs)");
  app->add_option("--cost-mode", f.cost_mode, "uniform or distance")->check(CLI::IsMember(kCostModes));
  app->add_option("--cost-min", f.spec.costs.min, "Smallest link cost");
  app->add_option("--cost-max", f.spec.costs.max, "Largest link cost");
}

std::vector<double> parse_tau_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ParameterError("bad tau value '" + item + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw ParameterError("tau grid is empty");
  return grid;
}

std::string default_tau_grid() {
  std::string s;
  for (int i = 1; i <= 20; ++i) s += (i > 1 ? "," : "") + format_number(i / 20.0);
  return s;
}

void write_key_values(const std::string& path, const std::string& manifest_ref, const std::vector<std::pair<std::string, std::string>>& rows) {
  auto out = open_out(path);
  out << "# manifest: " << manifest_ref << '\n' << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

// Tau recorded in the manifest named by a table dump's "# manifest:" line,
// or empty when that manifest is not at hand.
std::string tau_of_tables(const std::string& tables_path) {
  std::ifstream in(tables_path);
  std::string first;
  if (!std::getline(in, first) || first.rfind("# manifest: ", 0) != 0) return "";
  const auto slash = tables_path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : tables_path.substr(0, slash + 1);
  std::ifstream m(dir + first.substr(12));
  if (!m) return "";
  try {
    const auto doc = json::parse(m);
    return doc.at("parameters").at("tau").get<std::string>();
  } catch (const json::exception&) {
    return "";
  }
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err);

int run_replay(const std::string& manifest_path, bool verify, std::ostream& out, std::ostream& err) {
  json doc;
  try {
    doc = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest " + manifest_path + ": " + e.what());
  }
  if (!doc.contains("argv") || !doc["argv"].is_array()) throw ValidationError("manifest has no argv");
  const auto argv = doc["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") throw ValidationError("manifest records a replay");
  for (const auto& in : doc.value("inputs", json::array())) {
    const auto path = in.at("path").get<std::string>();
    if (fnv1a_hex(read_file(path)) != in.at("fnv1a64").get<std::string>()) throw ValidationError("input changed since the manifest was written: " + path);
  }
  const int rc = run(argv, out, err);
  if (rc != kExitOk || !verify) return rc;
  for (const auto& o : doc.value("outputs", json::array())) {
    const auto path = o.at("path").get<std::string>();
    if (fnv1a_hex(read_file(path)) != o.at("fnv1a64").get<std::string>()) throw InternalError("replay output differs: " + path);
  }
  out << "replay verified " << doc.value("outputs", json::array()).size() << " outputs\n";
  return kExitOk;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = expand_config(raw_args);

  CLI::App app{"Ant-based reachability routing simulator", "antroute"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", ANTROUTE_VERSION);

  std::optional<std::uint64_t> seed;
  std::string out_path;

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a topology file");
  gen->require_subcommand(1);
  std::size_t tree_nodes = 10, tree_children = 2;
  CostRange costs{1.0, 1.0};
  auto add_costs = [&](CLI::App* a) {
    a->add_option("--cost-min", costs.min, "Smallest link cost");
    a->add_option("--cost-max", costs.max, "Largest link cost");
  };
  auto* gen_tree = gen->add_subcommand("tree", "Random tree");
  gen_tree->add_option("--nodes", tree_nodes, "Number of nodes");
  gen_tree->add_option("--max-children", tree_children, "Children per node at most");
  add_costs(gen_tree);
  gen_tree->add_option("--seed", seed, "Random seed");
  std::size_t rows = 8, cols = 5;
  auto* gen_clique = gen->add_subcommand("clique", "Grid lattice with 4-neighbour links");
  gen_clique->add_option("--rows", rows, "Rows");
  gen_clique->add_option("--cols", cols, "Columns");
  add_costs(gen_clique);
  gen_clique->add_option("--seed", seed, "Random seed");
  VelcroSpec velcro;
  auto* gen_velcro = gen->add_subcommand("velcro", "Direct link plus a fulcrum chain with attached rings");
  gen_velcro->add_option("--fulcrums", velcro.fulcrum_count, "Number of fulcrums");
  gen_velcro->add_option("--loop-size", velcro.loop_size, "Extra nodes per ring");
  gen_velcro->add_option("--main-cost", velcro.main_cost, "Cost of the direct link");
  gen_velcro->add_option("--chain-cost", velcro.chain_cost, "Total cost of the fulcrum chain");
  gen_velcro->add_option("--loop-link-cost", velcro.loop_link_cost, "Cost of each ring link");
  WaxmanFlags waxman;
  auto* gen_waxman = gen->add_subcommand("waxman", "Waxman random graph");
  add_waxman_flags(gen_waxman, waxman, true);
  gen_waxman->add_option("--seed", seed, "Random seed");
  for (auto* g : {gen_tree, gen_clique, gen_velcro, gen_waxman}) g->add_option("--out", out_path, "Topology file to write")->required();

  // explore
  std::string topo_path, tables_path;
  ExploreFlags explore_flags;
  auto* explore = app.add_subcommand("explore", "Run ant exploration and dump routing tables");
  explore->add_option("--topo", topo_path, "Topology file")->required();
  add_explore_flags(explore, explore_flags);
  explore->add_option("--seed", seed, "Random seed");
  explore->add_option("--out", out_path, "Table dump CSV")->required();

  // route
  RouteFlags route_flags;
  auto* route = app.add_subcommand("route", "Route packets over dumped tables");
  route->add_option("--topo", topo_path, "Topology file")->required();
  route->add_option("--tables", tables_path, "Table dump CSV")->required();
  add_route_flags(route, route_flags);
  route->add_option("--seed", seed, "Random seed");
  route->add_option("--out", out_path, "Metrics CSV")->required();

  // sweep
  ExploreFlags sweep_explore;
  RouteFlags sweep_route;
  sweep_route.phi = "max";
  std::string tau_grid = default_tau_grid();
  double in_force_epsilon = kDefaultInForceEpsilon;
  std::size_t workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Operating curve over a tau grid");
  sweep->add_option("--topo", topo_path, "Topology file")->required();
  sweep->add_option("--tau-grid", tau_grid, "Comma-separated tau values");
  sweep->add_option("--in-force-epsilon", in_force_epsilon, "Fallback share below which the model counts as in force");
  sweep->add_option("--workers", workers, "Parallel simulations (0 = hardware concurrency)");
  add_explore_flags(sweep, sweep_explore);
  sweep->get_option("--tau")->description("Unused by sweep; the grid supplies tau");
  add_route_flags(sweep, sweep_route);
  sweep->add_option("--seed", seed, "Random seed");
  sweep->add_option("--out", out_path, "Curve CSV")->required();

  // fit
  ExploreFlags fit_explore;
  fit_explore.sim.params.lambda = 0.01;
  WaxmanFlags fit_waxman;
  std::vector<std::size_t> sizes{20, 40, 60, 80, 100};
  std::size_t per_size = 1;
  auto* fit = app.add_subcommand("fit", "Fit kappa to phi = 1 path lengths over topology sizes");
  fit->add_option("--sizes", sizes, "Node counts")->delimiter(',');
  fit->add_option("--topologies-per-size", per_size, "Topologies averaged per size");
  fit->add_option("--workers", workers, "Parallel simulations (0 = hardware concurrency)");
  add_waxman_flags(fit, fit_waxman, false);
  add_explore_flags(fit, fit_explore);
  fit->add_option("--seed", seed, "Random seed");
  fit->add_option("--out", out_path, "Per-size CSV")->required();

  // replay
  std::string manifest_path;
  bool verify = false;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", manifest_path, "Manifest JSON")->required();
  replay->add_flag("--verify", verify, "Fail unless outputs match the recorded hashes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << ANTROUTE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (replay->parsed()) return run_replay(manifest_path, verify, out, err);

  CLI::App* leaf = app.get_subcommands().front();
  std::string command = leaf->get_name();
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += " " + leaf->get_name();
  }

  // Resolve an omitted seed now so the manifest can replay it.
  const bool seeded = leaf->get_option_no_throw("--seed") != nullptr;
  std::vector<std::string> resolved = args;
  if (seeded && !seed) {
    seed = entropy_seed();
    resolved.push_back("--seed");
    resolved.push_back(std::to_string(*seed));
  }
  json params = collect_parameters(leaf);
  if (seeded) params["seed"] = std::to_string(*seed);

  const std::string stem = stem_of(out_path);
  Manifest manifest(command, resolved, stem + ".manifest.json");
  if (seeded) manifest.seed(*seed);
  manifest.parameters(params);
  const auto ref = manifest.ref();

  if (gen->parsed()) {
    Topology topo = [&] {
      if (gen_tree->parsed()) return generate_tree(tree_nodes, tree_children, costs, *seed);
      if (gen_clique->parsed()) return generate_clique_grid(rows, cols, costs, *seed);
      if (gen_velcro->parsed()) return generate_velcro(velcro);
      WaxmanSpec spec = waxman.spec;
      spec.cost_mode = kCostModes.at(waxman.cost_mode);
      spec.seed = *seed;
      return generate_waxman(spec);
    }();
    save_topology(topo, out_path);
    manifest.output(out_path);
    manifest.write();
    out << command << ": " << topo.node_count() << " nodes, " << topo.links().size() << " links, max degree " << topo.max_degree()
        << " -> " << out_path << '\n';
    return kExitOk;
  }

  if (explore->parsed()) {
    manifest.input(topo_path);
    const auto topo = load_topology(topo_path);
    const auto cfg = to_sim_config(explore_flags, *seed);
    const auto result = run_exploration(topo, cfg);
    save_table_dump(out_path, result.tables, result.models, ref);
    const auto& s = result.stats;
    const std::string stats_path = stem + ".stats.csv";
    write_key_values(stats_path, ref,
                     {{"ants_generated", u64(s.ants_generated)},
                      {"ants_absorbed_at_destination", u64(s.ants_absorbed_at_destination)},
                      {"ants_returned_to_source", u64(s.ants_returned_to_source)},
                      {"ants_expired", u64(s.ants_expired)},
                      {"ants_in_flight_at_end", u64(s.ants_in_flight_at_end)},
                      {"uncontrolled_decisions", u64(s.uncontrolled_decisions)},
                      {"controlled_decisions", u64(s.controlled_decisions)},
                      {"regular_decisions", u64(s.regular_decisions)},
                      {"leaf_sendbacks", u64(s.leaf_sendbacks)},
                      {"no_eligible_sendbacks", u64(s.no_eligible_sendbacks)},
                      {"source_uncontrolled_fallbacks", u64(s.source_uncontrolled_fallbacks)},
                      {"fallback_fraction", format_number(s.fallback_fraction())},
                      {"table_updates", u64(s.table_updates)},
                      {"events_dispatched", u64(s.events_dispatched)},
                      {"final_time", std::to_string(s.final_time)}});
    manifest.output(out_path);
    manifest.output(stats_path);
    manifest.write();
    out << "explore: " << s.ants_generated << " ants, fallback fraction " << format_number(s.fallback_fraction()) << " -> " << out_path << '\n';
    return kExitOk;
  }

  if (route->parsed()) {
    manifest.input(topo_path);
    manifest.input(tables_path);
    const auto topo = load_topology(topo_path);
    const auto dump = load_table_dump(tables_path, topo);
    const auto traffic = to_traffic(route_flags, topo, *seed);
    const auto result = run_traffic_experiment(topo, dump.tables, traffic);
    const auto& m = result.metrics;
    {
      auto f = open_out(out_path);
      f << "# manifest: " << ref << '\n'
        << "phi,tau,success_pct,loop_pct,multipath_pct,total_loops,ttl_drops,packets,delivered,absorbed_at_source,packets_with_loops,"
           "multipath_packets,ttl_drop_pct\n"
        << traffic.phi << ',' << tau_of_tables(tables_path) << ',' << format_number(m.success_pct()) << ',' << format_number(m.loop_pct()) << ','
        << format_number(m.multipath_pct()) << ',' << m.total_loops << ',' << m.ttl_drops << ',' << m.packets << ',' << m.delivered << ','
        << m.absorbed_at_source << ',' << m.packets_with_loops << ',' << m.multipath_packets << ',' << format_number(m.ttl_drop_pct()) << '\n';
    }
    const std::string loops_path = stem + ".loops.csv";
    {
      auto f = open_out(loops_path);
      f << "# manifest: " << ref << '\n' << "loop_count,packet_count\n";
      for (const auto& [k, c] : loop_frequency_histogram(m)) f << k << ',' << c << '\n';
    }
    const std::string buckets_path = stem + ".buckets.csv";
    {
      const auto b = traffic_distribution_buckets(result.paths);
      auto f = open_out(buckets_path);
      f << "# manifest: " << ref << "\n# pairs_used: " << b.pairs_used << "\n# pairs_excluded: " << b.pairs_excluded << '\n'
        << "bucket_index,frequency_sum\n";
      for (std::size_t i = 0; i < b.frequency.size(); ++i) f << i + 1 << ',' << b.frequency[i] << '\n';
    }
    const std::string paths_path = stem + ".paths.csv";
    {
      auto f = open_out(paths_path);
      f << "# manifest: " << ref << '\n' << "source,destination,cost,frequency,path\n";
      for (const auto& [pair, paths] : result.paths.pairs) {
        for (const auto& [seq, st] : paths) {
          f << pair.first << ',' << pair.second << ',' << format_number(st.cost) << ',' << st.frequency << ',';
          for (std::size_t i = 0; i < seq.size(); ++i) f << (i ? " " : "") << seq[i];
          f << '\n';
        }
      }
    }
    for (const auto& p : {out_path, loops_path, buckets_path, paths_path}) manifest.output(p);
    manifest.write();
    out << "route: phi " << traffic.phi << ", success " << format_number(m.success_pct()) << "%, loops " << format_number(m.loop_pct())
        << "%, multipath " << format_number(m.multipath_pct()) << "% -> " << out_path << '\n';
    return kExitOk;
  }

  if (sweep->parsed()) {
    const auto grid = parse_tau_grid(tau_grid);
    manifest.input(topo_path);
    const auto topo = load_topology(topo_path);
    const auto sim = to_sim_config(sweep_explore, *seed);
    const auto traffic = to_traffic(sweep_route, topo, *seed);
    OperatingCurveOptions opts;
    opts.in_force_epsilon = in_force_epsilon;
    opts.workers = workers;
    const auto curve = operating_curve(topo, grid, sim, traffic, opts);
    {
      auto f = open_out(out_path);
      f << "# manifest: " << ref << '\n' << "tau,loop_pct,multipath_pct,success_pct,model_in_force,fallback_fraction,ttl_drop_pct\n";
      for (const auto& p : curve)
        f << format_number(p.tau) << ',' << format_number(p.loop_pct) << ',' << format_number(p.multipath_pct) << ','
          << format_number(p.success_pct) << ',' << (p.model_in_force ? 1 : 0) << ',' << format_number(p.fallback_fraction) << ','
          << format_number(p.ttl_drop_pct) << '\n';
    }
    manifest.output(out_path);
    manifest.write();
    out << "sweep: " << curve.size() << " points -> " << out_path << '\n';
    return kExitOk;
  }

  if (fit->parsed()) {
    FitExperimentConfig cfg;
    cfg.sizes = sizes;
    cfg.topologies_per_size = per_size;
    cfg.waxman = fit_waxman.spec;
    cfg.waxman.cost_mode = kCostModes.at(fit_waxman.cost_mode);
    cfg.sim = to_sim_config(fit_explore, *seed);
    cfg.seed = *seed;
    cfg.workers = workers;
    const auto r = run_fit_experiment(cfg);
    {
      auto f = open_out(out_path);
      f << "# manifest: " << ref << '\n' << "nodes,measured,theoretical,residual,runs,oracle_hops,average_degree,deficiencies,pairs\n";
      for (const auto& s : r.per_size) {
        const double theory = theoretical_path_length(static_cast<double>(s.node_count), r.fit.kappa);
        f << s.node_count << ',' << format_number(s.average_hops) << ',' << format_number(theory) << ','
          << format_number(s.average_hops - theory) << ',' << s.runs << ',' << format_number(s.oracle_average_hops) << ','
          << format_number(s.average_degree) << ',' << s.deficiencies << ',' << s.pairs << '\n';
      }
    }
    const std::string summary_path = stem + ".summary.csv";
    write_key_values(summary_path, ref,
                     {{"kappa", format_number(r.fit.kappa)},
                      {"r_squared", format_number(r.fit.r_squared)},
                      {"residual_sum_squares", format_number(r.fit.residual_sum_squares)}});
    const std::string report_path = stem + ".report.txt";
    {
      auto f = open_out(report_path);
      f << "manifest: " << ref << '\n' << "kappa: " << format_number(r.fit.kappa) << '\n' << "r_squared: " << format_number(r.fit.r_squared) << '\n';
      for (const auto& s : r.per_size)
        f << "N=" << s.node_count << " measured=" << format_number(s.average_hops)
          << " theoretical=" << format_number(theoretical_path_length(static_cast<double>(s.node_count), r.fit.kappa)) << '\n';
    }
    manifest.output(report_path);
    manifest.output(out_path);
    manifest.output(summary_path);
    manifest.write();
    out << "fit: kappa " << format_number(r.fit.kappa) << ", r^2 " << format_number(r.fit.r_squared) << " -> " << out_path << '\n';
    return kExitOk;
  }
  throw InternalError("no command dispatched");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace antroute
