#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "antroute/ant_core.hpp"
#include "antroute/topology.hpp"

namespace antroute {

struct TableDump {
  std::vector<RoutingTable> tables;
  std::vector<StatModel> models;
};

// CSV with header node,destination,interface,probability,sent,returned and
// one row per (node, destination, interface). Probabilities are written in
// shortest round-trip form so a reload is bit-identical. A non-empty
// manifest_ref is emitted as a leading "# manifest: ..." line.
void write_table_dump(std::ostream& out, std::span<const RoutingTable> tables, std::span<const StatModel> models,
                      std::string_view manifest_ref = {});

// Parses a dump and checks it against the topology: every row present once,
// shapes match, rows sum to 1 within 1e-9, returned <= sent.
TableDump read_table_dump(std::string_view text, const Topology& topology);

TableDump load_table_dump(const std::string& path, const Topology& topology);
void save_table_dump(const std::string& path, std::span<const RoutingTable> tables, std::span<const StatModel> models,
                     std::string_view manifest_ref = {});

}  // namespace antroute
