#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynmis/dyngraph.hpp"
#include "dynmis/solvers.hpp"

namespace dynmis {

inline constexpr double kInclusionThreshold = 0.5;

/// Maintains round_solution(estimates, snapshot) across events.
///
/// Violation removal never crosses a connected component of the
/// candidate-induced subgraph, so after an event only the components that
/// contain a changed node or touch one are recomputed. The result is
/// identical to rounding from scratch.
class Rounder {
 public:
  void reset(const Snapshot& s, std::span<const double> estimate);

  /// `changed` must include every node whose estimate changed and both
  /// endpoints of any edge that changed since the last call.
  void update(const Snapshot& s, std::span<const double> estimate, std::span<const NodeId> changed);

  bool contains(NodeId v) const { return in_set_[v] != 0; }
  std::size_t size() const { return size_; }
  IndependentSet members() const;

  /// Nodes revisited by the last update (for cost accounting).
  std::size_t last_work() const { return last_work_; }

 private:
  void resolve(const Snapshot& s, std::span<const double> estimate, std::span<const NodeId> nodes);

  std::vector<std::uint8_t> candidate_;
  std::vector<std::uint8_t> in_set_;
  std::vector<std::uint32_t> violations_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> work_;
  // Heap entries go stale when a neighbour is removed; stale ones are
  // skipped on pop.
  struct Entry {
    std::uint32_t violations;
    double estimate;
    NodeId node;
  };
  static bool removed_later(const Entry& a, const Entry& b);

  std::vector<Entry> heap_;
  std::size_t size_ = 0;
  std::size_t last_work_ = 0;
};

}  // namespace dynmis
