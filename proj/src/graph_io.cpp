#include "dynmis/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dynmis {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    fail(line, "expected a non-negative integer, got '" + std::string(field) + "'");
  return value;
}

}  // namespace

DynamicGraph read_dynamic_graph(std::istream& in) {
  DynamicGraph dg;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  std::uint64_t n = 0;
  std::uint64_t initial_remaining = 0;
  std::vector<Edge> initial;

  while (std::getline(in, raw)) {
    ++line;
    const auto fields = split_fields(raw);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 3) fail(line, "expected 3 fields, got " + std::to_string(fields.size()));
    const std::string_view tag = fields[0];

    if (!have_header) {
      if (tag != "n") fail(line, "expected header 'n <node_count> <initial_edge_count>'");
      n = parse_uint(fields[1], line);
      initial_remaining = parse_uint(fields[2], line);
      if (n > std::uint64_t(std::numeric_limits<NodeId>::max())) fail(line, "node count too large");
      have_header = true;
      continue;
    }

    const auto a = parse_uint(fields[1], line);
    const auto b = parse_uint(fields[2], line);
    if (a >= n || b >= n) fail(line, "endpoint out of range");
    if (a == b) fail(line, "self-loop");

    if (initial_remaining > 0) {
      if (tag != "e") fail(line, "expected initial edge line 'e <u> <v>'");
      initial.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
      --initial_remaining;
      continue;
    }
    EventKind kind;
    if (tag == "+") {
      kind = EventKind::Add;
    } else if (tag == "-") {
      kind = EventKind::Delete;
    } else {
      fail(line, "expected event line '+ <u> <v>' or '- <u> <v>'");
    }
    dg.events.push_back({dg.events.size() + 1, static_cast<NodeId>(a), static_cast<NodeId>(b), kind});
  }
  if (!have_header) fail(line, "missing header");
  if (initial_remaining > 0) fail(line, "file ends inside the initial edge block");

  try {
    dg.initial = Snapshot::from_edges(n, initial);
  } catch (const Error& err) {
    throw Error(ErrorCode::ParseError, std::string("initial edge block: ") + err.what());
  }
  return dg;
}

DynamicGraph load_dynamic_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_dynamic_graph(in);
}

void write_dynamic_graph(std::ostream& out, const DynamicGraph& dg) {
  const auto edges = dg.initial.edges();
  out << "n " << dg.initial.node_count() << ' ' << edges.size() << '\n';
  for (const auto& [a, b] : edges) out << "e " << a << ' ' << b << '\n';
  for (const auto& e : dg.events)
    out << (e.kind == EventKind::Add ? '+' : '-') << ' ' << e.u << ' ' << e.v << '\n';
}

void save_dynamic_graph(const std::filesystem::path& path, const DynamicGraph& dg) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  write_dynamic_graph(out, dg);
}

}  // namespace dynmis
