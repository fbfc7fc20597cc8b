#include "dynmis/rounding.hpp"

#include <algorithm>

#include "dynmis/model.hpp"

namespace dynmis {

// Most violations first, then lower estimate, then larger id.
bool Rounder::removed_later(const Entry& a, const Entry& b) {
  if (a.violations != b.violations) return a.violations < b.violations;
  if (a.estimate != b.estimate) return a.estimate > b.estimate;
  return a.node < b.node;
}

void Rounder::reset(const Snapshot& s, std::span<const double> estimate) {
  const std::size_t n = s.node_count();
  candidate_.assign(n, 0);
  in_set_.assign(n, 0);
  violations_.assign(n, 0);
  seen_.assign(n, 0);
  epoch_ = 0;
  size_ = 0;
  work_.clear();
  for (NodeId v = 0; v < n; ++v) {
    candidate_[v] = estimate[v] >= kInclusionThreshold;
    if (candidate_[v]) work_.push_back(v);
  }
  resolve(s, estimate, work_);
  last_work_ = work_.size();
}

void Rounder::update(const Snapshot& s, std::span<const double> estimate, std::span<const NodeId> changed) {
  if (++epoch_ == 0) {
    std::fill(seen_.begin(), seen_.end(), 0);
    epoch_ = 1;
  }
  work_.clear();
  const auto visit = [&](NodeId v) {
    if (candidate_[v] && seen_[v] != epoch_) {
      seen_[v] = epoch_;
      work_.push_back(v);
    }
  };
  for (NodeId v : changed) {
    candidate_[v] = estimate[v] >= kInclusionThreshold;
    if (!candidate_[v] && in_set_[v]) {
      in_set_[v] = 0;
      --size_;
    }
  }
  for (NodeId v : changed) {
    visit(v);
    for (NodeId w : s.neighbors(v)) visit(w);
  }
  // Close the seeds under candidate adjacency.
  for (std::size_t head = 0; head < work_.size(); ++head)
    for (NodeId w : s.neighbors(work_[head])) visit(w);

  for (NodeId v : work_) size_ -= in_set_[v];
  resolve(s, estimate, work_);
  last_work_ = work_.size();
}

void Rounder::resolve(const Snapshot& s, std::span<const double> estimate, std::span<const NodeId> nodes) {
  heap_.clear();
  for (NodeId v : nodes) {
    std::uint32_t count = 0;
    for (NodeId w : s.neighbors(v)) count += candidate_[w];
    violations_[v] = count;
    in_set_[v] = 1;
    if (count > 0) heap_.push_back({count, estimate[v], v});
  }
  std::make_heap(heap_.begin(), heap_.end(), removed_later);
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), removed_later);
    const Entry top = heap_.back();
    heap_.pop_back();
    const NodeId v = top.node;
    if (!in_set_[v] || violations_[v] != top.violations) continue;
    in_set_[v] = 0;
    for (NodeId w : s.neighbors(v)) {
      if (!candidate_[w] || !in_set_[w]) continue;
      if (--violations_[w] > 0) {
        heap_.push_back({violations_[w], estimate[w], w});
        std::push_heap(heap_.begin(), heap_.end(), removed_later);
      }
    }
  }
  for (NodeId v : nodes) size_ += in_set_[v];
}

IndependentSet Rounder::members() const {
  IndependentSet out;
  for (NodeId v = 0; v < in_set_.size(); ++v)
    if (in_set_[v]) out.push_back(v);
  return out;
}

IndependentSet round_solution(std::span<const double> estimate, const Snapshot& s) {
  Rounder r;
  r.reset(s, estimate);
  return r.members();
}

}  // namespace dynmis
