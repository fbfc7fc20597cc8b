#include "dynmis/dyngraph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace dynmis {

namespace {

std::string describe(const EdgeEvent& e) {
  return std::string(e.kind == EventKind::Add ? "+" : "-") + " (" + std::to_string(e.u) + "," +
         std::to_string(e.v) + ") at t=" + std::to_string(e.time);
}

}  // namespace

Snapshot Snapshot::from_edges(std::size_t node_count, std::span<const Edge> edges) {
  Snapshot s(node_count);
  for (const auto& [a, b] : edges) s.apply(EdgeEvent::add(a, b));
  return s;
}

bool Snapshot::has_edge(NodeId a, NodeId b) const {
  if (a >= adjacency_.size() || b >= adjacency_.size()) return false;
  const auto& small = adjacency_[a].size() <= adjacency_[b].size() ? adjacency_[a] : adjacency_[b];
  const NodeId other = &small == &adjacency_[a] ? b : a;
  return std::binary_search(small.begin(), small.end(), other);
}

void Snapshot::check(const EdgeEvent& e) const {
  if (e.u >= adjacency_.size() || e.v >= adjacency_.size())
    throw Error(ErrorCode::NodeOutOfRange, describe(e));
  if (e.u == e.v) throw Error(ErrorCode::SelfLoop, describe(e));
  const bool present = has_edge(e.u, e.v);
  if (e.kind == EventKind::Add && present) throw Error(ErrorCode::AddExisting, describe(e));
  if (e.kind == EventKind::Delete && !present) throw Error(ErrorCode::DeleteMissing, describe(e));
}

void Snapshot::apply(const EdgeEvent& e) {
  check(e);
  auto& nu = adjacency_[e.u];
  auto& nv = adjacency_[e.v];
  if (e.kind == EventKind::Add) {
    nu.insert(std::lower_bound(nu.begin(), nu.end(), e.v), e.v);
    nv.insert(std::lower_bound(nv.begin(), nv.end(), e.u), e.u);
    ++edge_count_;
  } else {
    nu.erase(std::lower_bound(nu.begin(), nu.end(), e.v));
    nv.erase(std::lower_bound(nv.begin(), nv.end(), e.u));
    --edge_count_;
  }
}

std::vector<Edge> Snapshot::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId a = 0; a < adjacency_.size(); ++a)
    for (NodeId b : adjacency_[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

Snapshot apply_event(Snapshot s, const EdgeEvent& e) {
  s.apply(e);
  return s;
}

BallSearch::BallSearch(std::size_t node_count) : stamp_(node_count, 0) {}

const std::vector<HopDistance>& BallSearch::run(const Snapshot& s, std::span<const NodeId> sources,
                                                std::uint32_t cutoff) {
  if (stamp_.size() != s.node_count()) {
    stamp_.assign(s.node_count(), 0);
    epoch_ = 0;
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  out_.clear();
  for (NodeId src : sources) {
    if (src >= s.node_count() || stamp_[src] == epoch_) continue;
    stamp_[src] = epoch_;
    out_.push_back({src, 0});
  }
  // out_ doubles as the BFS queue.
  for (std::size_t head = 0; head < out_.size(); ++head) {
    const auto [v, d] = out_[head];
    if (d == cutoff) continue;
    for (NodeId w : s.neighbors(v)) {
      if (stamp_[w] == epoch_) continue;
      stamp_[w] = epoch_;
      out_.push_back({w, d + 1});
    }
  }
  return out_;
}

std::vector<HopDistance> hop_distances(const Snapshot& s, std::span<const NodeId> sources,
                                       std::uint32_t cutoff) {
  BallSearch search(s.node_count());
  return search.run(s, sources, cutoff);
}

std::uint32_t diameter(const Snapshot& s) {
  const std::size_t n = s.node_count();
  BallSearch search(n);
  std::uint32_t best = 0;
  const auto unbounded = std::numeric_limits<std::uint32_t>::max();
  for (NodeId v = 0; v < n; ++v) {
    if (s.degree(v) == 0) continue;
    const NodeId src[] = {v};
    const auto& ball = search.run(s, src, unbounded);
    best = std::max(best, ball.back().distance);
  }
  return best;
}

std::vector<Violation> validate(const DynamicGraph& dg) {
  std::vector<Violation> out;
  Snapshot s = dg.initial;
  for (std::size_t i = 0; i < dg.events.size(); ++i) {
    const EdgeEvent& e = dg.events[i];
    try {
      s.apply(e);
    } catch (const Error& err) {
      out.push_back({i + 1, err.code(), e.u, e.v});
    }
  }
  return out;
}

Snapshot snapshot_at(const DynamicGraph& dg, std::size_t t) {
  if (t > dg.events.size())
    throw Error(ErrorCode::InvalidArgument, "time " + std::to_string(t) + " beyond horizon");
  Snapshot s = dg.initial;
  for (std::size_t i = 0; i < t; ++i) s.apply(dg.events[i]);
  return s;
}

}  // namespace dynmis
