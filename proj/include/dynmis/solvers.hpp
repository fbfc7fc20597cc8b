#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dynmis/dyngraph.hpp"

namespace dynmis {

/// Sorted node list. Independence is relative to the snapshot that
/// produced it.
using IndependentSet = std::vector<NodeId>;

bool is_independent(const Snapshot& s, const IndependentSet& set);
bool is_maximal(const Snapshot& s, const IndependentSet& set);

struct ExactResult {
  IndependentSet set;
  bool proven_optimal = false;
  double elapsed = 0.0;        // seconds
  std::uint64_t branch_nodes = 0;
};

inline constexpr double kNoTimeLimit = std::numeric_limits<double>::infinity();

/// Branch and bound maximum independent set. Branches on a maximum-degree
/// residual vertex (include it and drop its neighborhood, or exclude it);
/// prunes with the residual size and a greedy clique-cover bound. Degree
/// 0/1 vertices are taken without branching and an all-degree-2 residual
/// (disjoint cycles) is solved in closed form. On timeout the incumbent is
/// returned with proven_optimal = false.
ExactResult exact_maxis(const Snapshot& s, double time_limit = kNoTimeLimit);

/// Min-degree greedy: repeatedly take the residual vertex of least degree
/// (ties to the smaller id) and delete its closed neighborhood.
IndependentSet greedy_maxis(const Snapshot& s);

/// Incrementally maintained maximal independent set.
///
/// Rules per event:
///  - Add(u,v) with both endpoints in the set: evict the endpoint of higher
///    current degree (ties: larger id), then re-add freed neighbors of the
///    evicted node in min-degree order.
///  - Delete(u,v): try to add u, then v, if they became free.
/// Then members within two hops of the event are improved by one-for-two
/// swaps until none applies. The set stays independent and maximal after
/// every step.
class UpdateState {
 public:
  UpdateState() = default;
  explicit UpdateState(const Snapshot& s);

  /// Applies `e` to the mirror and repairs the set. Throws IllegalEvent if
  /// `e` violates its precondition; the state is unchanged in that case.
  void step(const EdgeEvent& e);

  const Snapshot& snapshot() const { return snapshot_; }
  bool contains(NodeId v) const { return in_set_[v] != 0; }
  std::uint32_t in_set_neighbors(NodeId v) const { return in_set_neighbors_[v]; }
  std::size_t size() const { return size_; }
  IndependentSet members() const;

  /// Recomputes all per-node counts and compares; true when consistent.
  bool counts_consistent() const;

 private:
  void insert(NodeId v);
  void erase(NodeId v);
  void insert_free_by_degree(std::vector<NodeId>& nodes);
  void improve_around(NodeId u, NodeId v);
  bool free(NodeId v) const { return in_set_[v] == 0 && in_set_neighbors_[v] == 0; }

  Snapshot snapshot_;
  std::vector<std::uint8_t> in_set_;
  std::vector<std::uint32_t> in_set_neighbors_;
  std::size_t size_ = 0;
  std::vector<std::uint8_t> queued_;
};

UpdateState update_algo_init(const Snapshot& s);
UpdateState update_algo_step(UpdateState st, const EdgeEvent& e);

}  // namespace dynmis
