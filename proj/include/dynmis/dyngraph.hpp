#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dynmis/errors.hpp"

namespace dynmis {

using NodeId = std::uint32_t;

enum class EventKind : std::uint8_t { Add, Delete };

/// A single edge addition or deletion. `time` is the 1-based step index in
/// the stream that owns the event (0 for free-standing events).
struct EdgeEvent {
  std::size_t time = 0;
  NodeId u = 0;
  NodeId v = 0;
  EventKind kind = EventKind::Add;

  static EdgeEvent add(NodeId a, NodeId b, std::size_t t = 0) { return {t, a, b, EventKind::Add}; }
  static EdgeEvent remove(NodeId a, NodeId b, std::size_t t = 0) { return {t, a, b, EventKind::Delete}; }

  bool operator==(const EdgeEvent&) const = default;
};

using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph on a fixed node set. Neighbor lists are kept
/// sorted so membership is a binary search.
class Snapshot {
 public:
  Snapshot() = default;
  explicit Snapshot(std::size_t node_count) : adjacency_(node_count) {}

  /// Builds from an edge list; throws on self-loops, duplicates or
  /// out-of-range endpoints.
  static Snapshot from_edges(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  bool has_edge(NodeId a, NodeId b) const;

  /// Applies `e` in place. Throws AddExisting, DeleteMissing, SelfLoop or
  /// NodeOutOfRange; the snapshot is unchanged on error.
  void apply(const EdgeEvent& e);

  /// Checks the precondition of `e` without applying it.
  void check(const EdgeEvent& e) const;

  /// All edges as (smaller, larger) pairs in lexicographic order.
  std::vector<Edge> edges() const;

  bool operator==(const Snapshot&) const = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Value-semantics form of Snapshot::apply.
Snapshot apply_event(Snapshot s, const EdgeEvent& e);

struct HopDistance {
  NodeId node;
  std::uint32_t distance;

  bool operator==(const HopDistance&) const = default;
};

/// Bounded multi-source BFS with scratch buffers reused across calls.
/// Results come back in BFS order (non-decreasing distance).
class BallSearch {
 public:
  explicit BallSearch(std::size_t node_count = 0);

  const std::vector<HopDistance>& run(const Snapshot& s, std::span<const NodeId> sources,
                                      std::uint32_t cutoff);

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<HopDistance> out_;
};

/// Nodes within `cutoff` hops of any source, with their distances.
std::vector<HopDistance> hop_distances(const Snapshot& s, std::span<const NodeId> sources,
                                       std::uint32_t cutoff);

/// Largest eccentricity over all connected components; 0 with no edges.
std::uint32_t diameter(const Snapshot& s);

/// Fixed node set, initial snapshot G_0 and the ordered event stream.
struct DynamicGraph {
  Snapshot initial;
  std::vector<EdgeEvent> events;

  std::size_t horizon() const noexcept { return events.size(); }
  std::size_t node_count() const noexcept { return initial.node_count(); }
};

struct Violation {
  std::size_t time;
  ErrorCode code;
  NodeId u;
  NodeId v;

  bool operator==(const Violation&) const = default;
};

/// Replays the stream and reports every precondition violation. Offending
/// events are skipped so later violations are still found.
std::vector<Violation> validate(const DynamicGraph& dg);

/// Snapshot G_t (t = 0 is the initial snapshot).
Snapshot snapshot_at(const DynamicGraph& dg, std::size_t t);

}  // namespace dynmis
