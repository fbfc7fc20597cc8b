#pragma once

#include <filesystem>
#include <iosfwd>

#include "dynmis/dyngraph.hpp"

namespace dynmis {

// Line-oriented text format:
//   n <node_count> <initial_edge_count>
//   e <u> <v>            (initial_edge_count lines)
//   + <u> <v> | - <u> <v> (one event per line, in time order)
// Blank lines and lines starting with '#' are ignored.

/// Throws ParseError with a line number on malformed input.
DynamicGraph read_dynamic_graph(std::istream& in);
DynamicGraph load_dynamic_graph(const std::filesystem::path& path);

void write_dynamic_graph(std::ostream& out, const DynamicGraph& dg);
void save_dynamic_graph(const std::filesystem::path& path, const DynamicGraph& dg);

}  // namespace dynmis
