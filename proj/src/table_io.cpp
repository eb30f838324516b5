#include "antroute/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "antroute/errors.hpp"

namespace antroute {

namespace {

constexpr std::string_view kHeader = "node,destination,interface,probability,sent,returned";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_field(std::string_view s, std::size_t line, const char* name) {
  T value{};
  s = trim(s);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ParseError(line, std::string("bad ") + name + " '" + std::string(s) + "'");
  return value;
}

}  // namespace

void write_table_dump(std::ostream& out, std::span<const RoutingTable> tables, std::span<const StatModel> models,
                      std::string_view manifest_ref) {
  if (tables.size() != models.size()) throw InternalError("table and model counts differ");
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << kHeader << '\n';
  for (NodeId n = 0; n < tables.size(); ++n) {
    const auto& t = tables[n];
    const auto& m = models[n];
    for (NodeId d = 0; d < t.destinations(); ++d) {
      const auto row = t.row(d);
      for (InterfaceIndex k = 0; k < t.degree(); ++k)
        out << n << ',' << d << ',' << k << ',' << format_number(row[k]) << ',' << m.sent(d, k) << ',' << m.returned(d, k) << '\n';
    }
  }
}

TableDump read_table_dump(std::string_view text, const Topology& topology) {
  const auto n = topology.node_count();
  TableDump dump;
  for (NodeId i = 0; i < n; ++i) {
    dump.tables.emplace_back(n, topology.degree(i));
    dump.models.emplace_back(n, topology.degree(i));
  }
  std::vector<std::vector<bool>> seen(n);
  for (NodeId i = 0; i < n; ++i) seen[i].assign(n * topology.degree(i), false);

  bool header = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto line = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    start = pos == std::string_view::npos ? text.size() + 1 : pos + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kHeader) throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6) throw ParseError(line_no, "expected 6 fields");
    const auto node = parse_field<NodeId>(f[0], line_no, "node");
    const auto dest = parse_field<NodeId>(f[1], line_no, "destination");
    const auto k = parse_field<InterfaceIndex>(f[2], line_no, "interface");
    const auto p = parse_field<double>(f[3], line_no, "probability");
    const auto sent = parse_field<std::uint64_t>(f[4], line_no, "sent");
    const auto ret = parse_field<std::uint64_t>(f[5], line_no, "returned");
    if (node >= n || dest >= n) throw ValidationError("line " + std::to_string(line_no) + ": node or destination outside topology");
    if (k >= topology.degree(node))
      throw ValidationError("line " + std::to_string(line_no) + ": interface " + std::to_string(k) + " exceeds degree of node " + std::to_string(node));
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("line " + std::to_string(line_no) + ": probability outside [0, 1]");
    auto&& mark = seen[node][static_cast<std::size_t>(dest) * topology.degree(node) + k];
    if (mark) throw ValidationError("line " + std::to_string(line_no) + ": duplicate entry");
    mark = true;
    dump.tables[node].row(dest)[k] = p;
    dump.models[node].set_counts(dest, k, sent, ret);
  }
  if (!header) throw ValidationError("table dump has no header");

  for (NodeId i = 0; i < n; ++i) {
    for (bool s : seen[i])
      if (!s) throw ValidationError("table dump is missing entries for node " + std::to_string(i));
    for (NodeId d = 0; d < n; ++d) {
      double sum = 0.0;
      for (double p : dump.tables[i].row(d)) sum += p;
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("row node " + std::to_string(i) + " destination " + std::to_string(d) + " sums to " + format_number(sum));
    }
  }
  return dump;
}

TableDump load_table_dump(const std::string& path, const Topology& topology) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_table_dump(ss.str(), topology);
}

void save_table_dump(const std::string& path, std::span<const RoutingTable> tables, std::span<const StatModel> models,
                     std::string_view manifest_ref) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_table_dump(out, tables, models, manifest_ref);
  if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace antroute
