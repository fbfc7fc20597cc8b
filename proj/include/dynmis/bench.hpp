#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynmis/checkpoint.hpp"
#include "dynmis/genesis.hpp"

namespace dynmis {

enum class Method { Bcas, NoCas, Greedy, Update, Exact };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);
/// Comma-separated list, e.g. "bcas,greedy,exact".
std::vector<Method> parse_methods(std::string_view text);

struct EventRecord {
  std::size_t t = 0;
  std::size_t set_size = 0;
  std::size_t oracle_size = 0;
  double ratio = 0.0;
  double seconds = 0.0;
  std::size_t touched_memory_nodes = 0;
  std::size_t touched_estimate_nodes = 0;
  bool oracle_optimal = true;  // false when the oracle hit its time limit

  bool operator==(const EventRecord&) const = default;
};

struct Aggregates {
  bool defined = false;  // false for an empty range
  double ratio_mean = 0.0;
  double ratio_std = 0.0;
  double mean_seconds = 0.0;
  std::uint64_t peak_rss_bytes = 0;
  std::size_t oracle_timeouts = 0;

  bool operator==(const Aggregates&) const = default;
};

struct MethodResult {
  std::string method;
  std::vector<EventRecord> records;
  Aggregates aggregates;

  bool operator==(const MethodResult&) const = default;
};

struct BenchOptions {
  std::vector<Method> methods;
  /// Checkpoint per learned method; a missing entry raises CheckpointMissing.
  std::map<Method, const Checkpoint*> checkpoints;
  double oracle_time_limit = 1.0;
  /// When false every `seconds` field is 0, which makes reports
  /// byte-reproducible.
  bool record_timing = true;
};

/// Replays `test` through every method. Events before the range are
/// replayed untimed so incremental methods start from the right state.
/// Every reported set is verified independent; a violation throws.
std::vector<MethodResult> run_bench(const DynamicGraph& dg, EventRange test, const BenchOptions& opts);

/// Learned-model radii re-derived for the benchmarked graph.
Config bench_config(const Checkpoint& ck, Variant variant, const Snapshot& g0);

/// Memories to start a learned method on `g0`: the checkpoint's own when
/// the node count matches, otherwise the construction replay of g0.
neural::Tensor start_memories(const Checkpoint& ck, const Snapshot& g0);

std::uint64_t peak_rss_bytes();

Aggregates aggregate(std::span<const EventRecord> records);

}  // namespace dynmis
