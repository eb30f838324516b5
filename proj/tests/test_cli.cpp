#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "antroute/cli.hpp"
#include "antroute/table_io.hpp"
#include "antroute/topology.hpp"

using namespace antroute;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen commands") {
  const auto dir = scratch("gen");
  auto v = cli({"gen", "velcro", "--fulcrums", "3", "--loop-size", "5", "--main-cost", "10", "--chain-cost", "3", "--out", (dir / "v.topo").string()});
  CHECK(v.code == kExitOk);
  CHECK(load_topology((dir / "v.topo").string()) == generate_velcro({}));

  auto c = cli({"gen", "clique", "--rows", "8", "--cols", "5", "--out", (dir / "c.topo").string()});
  CHECK(c.code == kExitOk);
  CHECK(load_topology((dir / "c.topo").string()).node_count() == 40);

  auto w = cli({"gen", "waxman", "--nodes", "40", "--seed", "7", "--out", (dir / "w.topo").string()});
  CHECK(w.code == kExitOk);
  CHECK(w.out.find("40 nodes") != std::string::npos);
  CHECK(load_topology((dir / "w.topo").string()).node_count() == 40);

  auto bad = cli({"gen", "tree", "--nodes", "1", "--seed", "1", "--out", (dir / "t.topo").string()});
  CHECK(bad.code == kExitUsage);
  CHECK_FALSE(bad.err.empty());
  CHECK(cli({"gen"}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("explore, route and replay") {
  const auto dir = scratch("pipeline");
  const auto topo = (dir / "w.topo").string();
  REQUIRE(cli({"gen", "waxman", "--nodes", "12", "--seed", "3", "--out", topo}).code == kExitOk);

  const auto tables = (dir / "t.csv").string();
  auto e = cli({"explore", "--topo", topo, "--duration", "2000000", "--lambda", "0.01", "--out", tables});
  REQUIRE(e.code == kExitOk);
  const auto manifest = nlohmann::json::parse(slurp(dir / "t.manifest.json"));
  CHECK(manifest["command"] == "explore");
  CHECK(manifest["parameters"]["ant-period"] == "10000");
  CHECK(manifest.contains("seed"));
  CHECK(slurp(tables).rfind("# manifest: t.manifest.json\n", 0) == 0);
  CHECK(slurp(dir / "t.stats.csv").rfind("# manifest: t.manifest.json\nkey,value\n", 0) == 0);

  const auto metrics = (dir / "m.csv").string();
  auto r = cli({"route", "--topo", topo, "--tables", tables, "--phi", "1", "--packets-per-pair", "5", "--out", metrics});
  REQUIRE(r.code == kExitOk);
  std::istringstream m(slurp(metrics));
  std::string line, header, row;
  std::getline(m, line);
  std::getline(m, header);
  std::getline(m, row);
  CHECK(header.rfind("phi,tau,success_pct,loop_pct,multipath_pct,total_loops,ttl_drops", 0) == 0);
  CHECK(row.rfind("1,0.5,100,0,0,0,0,", 0) == 0);

  auto rmax = cli({"route", "--topo", topo, "--tables", tables, "--phi", "max", "--seed", "4", "--out", (dir / "mx.csv").string()});
  REQUIRE(rmax.code == kExitOk);
  const auto maxdeg = load_topology(topo).max_degree();
  CHECK(rmax.out.find("phi " + std::to_string(maxdeg)) != std::string::npos);
  CHECK(slurp(dir / "mx.loops.csv").find("loop_count,packet_count\n0,") != std::string::npos);
  CHECK(slurp(dir / "mx.buckets.csv").find("bucket_index,frequency_sum\n1,") != std::string::npos);
  CHECK(cli({"route", "--topo", topo, "--tables", tables, "--phi", "zero", "--out", (dir / "z.csv").string()}).code == kExitUsage);

  // Tables from another topology are rejected.
  const auto other = (dir / "o.topo").string();
  REQUIRE(cli({"gen", "clique", "--rows", "3", "--cols", "3", "--out", other}).code == kExitOk);
  CHECK(cli({"route", "--topo", other, "--tables", tables, "--out", (dir / "bad.csv").string()}).code == kExitValidation);

  // Replay reproduces every output byte for byte.
  const auto before_tables = slurp(tables), before_stats = slurp(dir / "t.stats.csv");
  const auto before_paths = slurp(dir / "mx.paths.csv");
  fs::remove(tables);
  fs::remove(dir / "mx.paths.csv");
  CHECK(cli({"replay", (dir / "t.manifest.json").string(), "--verify"}).code == kExitOk);
  CHECK(cli({"replay", (dir / "mx.manifest.json").string(), "--verify"}).code == kExitOk);
  CHECK(slurp(tables) == before_tables);
  CHECK(slurp(dir / "t.stats.csv") == before_stats);
  CHECK(slurp(dir / "mx.paths.csv") == before_paths);

  // A changed input blocks replay.
  {
    std::ofstream(topo, std::ios::app) << "# edited\n";
  }
  CHECK(cli({"replay", (dir / "t.manifest.json").string()}).code == kExitValidation);
}

TEST_CASE("sweep and config files") {
  const auto dir = scratch("sweep");
  const auto topo = (dir / "w.topo").string();
  REQUIRE(cli({"gen", "waxman", "--nodes", "10", "--seed", "2", "--out", topo}).code == kExitOk);
  CHECK(cli({"sweep", "--topo", topo, "--tau-grid", "", "--seed", "1", "--out", (dir / "e.csv").string()}).code == kExitUsage);

  const auto cfg = (dir / "run.cfg");
  {
    std::ofstream f(cfg);
    f << "# sweep settings\nduration = 1000000\npackets-per-pair=4\nworkers=2\ntau-grid = 0.3,1\n";
  }
  const auto curve = (dir / "curve.csv").string();
  auto s = cli({"sweep", "--config", cfg.string(), "--topo", topo, "--seed", "5", "--out", curve});
  REQUIRE(s.code == kExitOk);
  std::istringstream in(slurp(curve));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "tau,loop_pct,multipath_pct,success_pct,model_in_force,fallback_fraction,ttl_drop_pct");
  CHECK(lines[2].rfind("0.3,", 0) == 0);
  CHECK(lines[3].rfind("1,", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "curve.manifest.json"));
  CHECK(manifest["parameters"]["duration"] == "1000000");

  fs::remove(curve);
  CHECK(cli({"replay", (dir / "curve.manifest.json").string(), "--verify"}).code == kExitOk);
}
