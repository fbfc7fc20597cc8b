#include "dynmis/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <set>
#include <string>

namespace dynmis {

bool is_independent(const Snapshot& s, const IndependentSet& set) {
  std::vector<std::uint8_t> member(s.node_count(), 0);
  for (NodeId v : set) {
    if (v >= s.node_count() || member[v]) return false;
    member[v] = 1;
  }
  for (NodeId v : set)
    for (NodeId w : s.neighbors(v))
      if (member[w]) return false;
  return true;
}

bool is_maximal(const Snapshot& s, const IndependentSet& set) {
  if (!is_independent(s, set)) return false;
  std::vector<std::uint8_t> covered(s.node_count(), 0);
  for (NodeId v : set) {
    covered[v] = 1;
    for (NodeId w : s.neighbors(v)) covered[w] = 1;
  }
  return std::all_of(covered.begin(), covered.end(), [](std::uint8_t c) { return c != 0; });
}

namespace {

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t bits) : words_((bits + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  std::size_t and_count(const Bitset& other) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & other.words_[i]);
    return c;
  }
  void and_with(const Bitset& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  }
  void and_not(const Bitset& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  }
  /// First set bit of (this & other), or npos.
  std::size_t first_common(const Bitset& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (const auto w = words_[i] & other.words_[i]) return i * 64 + std::countr_zero(w);
    return npos;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      for (auto w = words_[i]; w != 0; w &= w - 1) f(i * 64 + std::countr_zero(w));
  }

  static constexpr std::size_t npos = std::size_t(-1);

 private:
  std::vector<std::uint64_t> words_;
};

struct Timeout {};

class BranchAndBound {
 public:
  BranchAndBound(const Snapshot& s, double time_limit)
      : n_(s.node_count()), adj_(n_, Bitset(n_)), time_limit_(time_limit),
        start_(std::chrono::steady_clock::now()) {
    for (NodeId v = 0; v < n_; ++v)
      for (NodeId w : s.neighbors(v)) adj_[v].set(w);
  }

  ExactResult solve(IndependentSet incumbent) {
    best_ = std::move(incumbent);
    Bitset all(n_);
    for (std::size_t v = 0; v < n_; ++v) all.set(v);
    ExactResult out;
    try {
      search(std::move(all));
      out.proven_optimal = true;
    } catch (const Timeout&) {
      out.proven_optimal = false;
    }
    out.set = best_;
    std::sort(out.set.begin(), out.set.end());
    out.branch_nodes = nodes_;
    out.elapsed = elapsed();
    return out;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void take(NodeId v, Bitset& residual) {
    current_.push_back(v);
    residual.reset(v);
  }

  // Degree-0 and degree-1 vertices belong to some maximum independent set of
  // the residual graph, so they are taken without branching.
  void reduce(Bitset& residual) {
    bool changed = true;
    while (changed) {
      changed = false;
      residual.for_each([&](std::size_t v) {
        if (!residual.test(v)) return;
        const auto d = adj_[v].and_count(residual);
        if (d == 0) {
          take(static_cast<NodeId>(v), residual);
          changed = true;
        } else if (d == 1) {
          const auto w = adj_[v].first_common(residual);
          take(static_cast<NodeId>(v), residual);
          residual.reset(w);
          changed = true;
        }
      });
    }
  }

  // Number of cliques in a greedy cover of the residual graph; stops early
  // once the count exceeds `stop_above`.
  std::size_t clique_cover(const Bitset& residual, std::size_t stop_above) {
    cover_.clear();
    std::size_t cliques = 0;
    residual.for_each([&](std::size_t v) {
      if (cliques > stop_above) return;
      for (std::size_t k = 0; k < cliques; ++k) {
        if (cover_[k].test(v)) {
          cover_[k].and_with(adj_[v]);
          return;
        }
      }
      if (cover_.size() <= cliques) cover_.emplace_back(n_);
      cover_[cliques] = adj_[v];
      cover_[cliques].and_with(residual);
      ++cliques;
    });
    return cliques;
  }

  // All residual vertices have degree exactly 2: disjoint cycles, each of
  // length k contributing floor(k/2) alternate vertices.
  void take_cycles(Bitset residual) {
    while (!residual.none()) {
      std::size_t start = residual.first_common(residual);
      std::vector<std::size_t> cycle{start};
      residual.reset(start);
      std::size_t at = start;
      for (;;) {
        const auto next = adj_[at].first_common(residual);
        if (next == Bitset::npos) break;
        residual.reset(next);
        cycle.push_back(next);
        at = next;
      }
      for (std::size_t i = 0; i + 1 < cycle.size(); i += 2) current_.push_back(static_cast<NodeId>(cycle[i]));
    }
  }

  void record() {
    if (current_.size() > best_.size()) best_ = current_;
  }

  void search(Bitset residual) {
    if ((++nodes_ & 255) == 0 && elapsed() > time_limit_) throw Timeout{};
    const std::size_t mark = current_.size();
    reduce(residual);

    const std::size_t remaining = residual.count();
    if (remaining == 0) {
      record();
      current_.resize(mark);
      return;
    }
    const std::size_t best = best_.size();
    const std::size_t have = current_.size();
    if (have + remaining <= best ||
        (best > have && clique_cover(residual, best - have) <= best - have)) {
      current_.resize(mark);
      return;
    }

    std::size_t pivot = 0;
    std::size_t pivot_degree = 0;
    residual.for_each([&](std::size_t v) {
      const auto d = adj_[v].and_count(residual);
      if (d > pivot_degree) {
        pivot_degree = d;
        pivot = v;
      }
    });

    if (pivot_degree <= 2) {
      take_cycles(std::move(residual));
      record();
      current_.resize(mark);
      return;
    }

    Bitset with = residual;
    with.and_not(adj_[pivot]);
    with.reset(pivot);
    current_.push_back(static_cast<NodeId>(pivot));
    search(std::move(with));
    current_.pop_back();

    residual.reset(pivot);
    search(std::move(residual));
    current_.resize(mark);
  }

  std::size_t n_;
  std::vector<Bitset> adj_;
  std::vector<Bitset> cover_;
  double time_limit_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t nodes_ = 0;
  IndependentSet current_;
  IndependentSet best_;
};

}  // namespace

ExactResult exact_maxis(const Snapshot& s, double time_limit) {
  BranchAndBound bnb(s, time_limit);
  return bnb.solve(greedy_maxis(s));
}

IndependentSet greedy_maxis(const Snapshot& s) {
  const std::size_t n = s.node_count();
  std::vector<std::uint32_t> degree(n);
  std::vector<std::uint8_t> alive(n, 1);
  std::set<std::pair<std::uint32_t, NodeId>> queue;
  for (NodeId v = 0; v < n; ++v) {
    degree[v] = static_cast<std::uint32_t>(s.degree(v));
    queue.emplace(degree[v], v);
  }
  IndependentSet out;
  const auto drop = [&](NodeId v) {
    alive[v] = 0;
    queue.erase({degree[v], v});
  };
  while (!queue.empty()) {
    const NodeId v = queue.begin()->second;
    out.push_back(v);
    drop(v);
    std::vector<NodeId> removed;
    for (NodeId w : s.neighbors(v))
      if (alive[w]) {
        drop(w);
        removed.push_back(w);
      }
    for (NodeId w : removed)
      for (NodeId x : s.neighbors(w))
        if (alive[x]) {
          queue.erase({degree[x], x});
          queue.emplace(--degree[x], x);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

UpdateState::UpdateState(const Snapshot& s)
    : snapshot_(s), in_set_(s.node_count(), 0), in_set_neighbors_(s.node_count(), 0) {
  for (NodeId v : greedy_maxis(s)) insert(v);
}

void UpdateState::insert(NodeId v) {
  in_set_[v] = 1;
  ++size_;
  for (NodeId w : snapshot_.neighbors(v)) ++in_set_neighbors_[w];
}

void UpdateState::erase(NodeId v) {
  in_set_[v] = 0;
  --size_;
  for (NodeId w : snapshot_.neighbors(v)) --in_set_neighbors_[w];
}

void UpdateState::step(const EdgeEvent& e) {
  try {
    snapshot_.check(e);
  } catch (const Error& err) {
    throw Error(ErrorCode::IllegalEvent, err.what());
  }
  const NodeId u = e.u;
  const NodeId v = e.v;
  snapshot_.apply(e);
  const int delta = e.kind == EventKind::Add ? 1 : -1;
  if (in_set_[u]) in_set_neighbors_[v] += delta;
  if (in_set_[v]) in_set_neighbors_[u] += delta;

  if (e.kind == EventKind::Add) {
    if (in_set_[u] && in_set_[v]) {
      const auto du = snapshot_.degree(u);
      const auto dv = snapshot_.degree(v);
      const NodeId evicted = (du > dv || (du == dv && u > v)) ? u : v;
      erase(evicted);
      std::vector<NodeId> freed;
      for (NodeId w : snapshot_.neighbors(evicted))
        if (free(w)) freed.push_back(w);
      insert_free_by_degree(freed);
    }
  } else {
    if (free(u)) insert(u);
    if (free(v)) insert(v);
  }
  improve_around(u, v);
}

void UpdateState::insert_free_by_degree(std::vector<NodeId>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) {
    const auto da = snapshot_.degree(a);
    const auto db = snapshot_.degree(b);
    return da != db ? da < db : a < b;
  });
  for (NodeId w : nodes)
    if (free(w)) insert(w);
}

// One-for-two swaps: a member x whose private neighbors (outside nodes with
// x as their only member neighbor) contain a non-adjacent pair is replaced
// by that pair plus any further private neighbors left free. Each swap grows
// the set, so the loop terminates.
void UpdateState::improve_around(NodeId u, NodeId v) {
  if (queued_.size() != in_set_.size()) queued_.assign(in_set_.size(), 0);
  std::vector<NodeId> work;
  const auto push = [&](NodeId x) {
    if (in_set_[x] && !queued_[x]) {
      queued_[x] = 1;
      work.push_back(x);
    }
  };
  // Tightness only changes next to the endpoints, so candidate members lie
  // within two hops of them.
  for (NodeId a : {u, v}) {
    push(a);
    for (NodeId w : snapshot_.neighbors(a)) {
      push(w);
      for (NodeId y : snapshot_.neighbors(w)) push(y);
    }
  }
  std::sort(work.begin(), work.end());

  std::vector<NodeId> priv;
  for (std::size_t head = 0; head < work.size(); ++head) {
    const NodeId x = work[head];
    queued_[x] = 0;
    if (!in_set_[x]) continue;
    priv.clear();
    for (NodeId w : snapshot_.neighbors(x))
      if (in_set_neighbors_[w] == 1) priv.push_back(w);
    if (priv.size() < 2) continue;
    std::sort(priv.begin(), priv.end(), [&](NodeId a, NodeId b) {
      const auto da = snapshot_.degree(a);
      const auto db = snapshot_.degree(b);
      return da != db ? da < db : a < b;
    });
    NodeId first = 0, second = 0;
    bool found = false;
    for (std::size_t i = 0; i < priv.size() && !found; ++i)
      for (std::size_t j = i + 1; j < priv.size() && !found; ++j)
        if (!snapshot_.has_edge(priv[i], priv[j])) {
          first = priv[i];
          second = priv[j];
          found = true;
        }
    if (!found) continue;

    erase(x);
    insert(first);
    insert(second);
    insert_free_by_degree(priv);
    // Members that may have gained private neighbors: the new members, and
    // the remaining member neighbor of any neighbor of x.
    for (NodeId w : snapshot_.neighbors(x)) {
      if (in_set_[w]) {
        push(w);
      } else if (in_set_neighbors_[w] == 1) {
        for (NodeId y : snapshot_.neighbors(w))
          if (in_set_[y]) push(y);
      }
    }
  }
}

IndependentSet UpdateState::members() const {
  IndependentSet out;
  for (NodeId v = 0; v < in_set_.size(); ++v)
    if (in_set_[v]) out.push_back(v);
  return out;
}

bool UpdateState::counts_consistent() const {
  std::size_t size = 0;
  for (NodeId v = 0; v < in_set_.size(); ++v) {
    std::uint32_t c = 0;
    for (NodeId w : snapshot_.neighbors(v)) c += in_set_[w];
    if (c != in_set_neighbors_[v]) return false;
    size += in_set_[v];
  }
  return size == size_;
}

UpdateState update_algo_init(const Snapshot& s) { return UpdateState(s); }

UpdateState update_algo_step(UpdateState st, const EdgeEvent& e) {
  st.step(e);
  return st;
}

}  // namespace dynmis
