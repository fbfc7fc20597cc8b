#include "dynmis/genesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynmis/rng.hpp"

namespace dynmis {

namespace {

constexpr std::uint64_t kEventStream = 0x45564e54ULL;  // separates event draws from G_0 draws

std::uint64_t edge_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(a) << 32) | b;
}

Snapshot gen_erdos_renyi(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (rng.uniform() < p) edges.emplace_back(a, b);
  return Snapshot::from_edges(n, edges);
}

std::vector<std::uint32_t> sample_degrees(std::size_t n, const PowerLaw& pl, Rng& rng) {
  auto kmax = static_cast<std::uint32_t>(n - 1);
  if (pl.max_degree > 0) kmax = std::min(kmax, pl.max_degree);
  const std::uint32_t kmin = std::min(pl.min_degree, kmax);
  std::vector<double> cdf;
  for (std::uint32_t k = kmin; k <= kmax; ++k) cdf.push_back(std::pow(double(k), -pl.exponent));
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double total = cdf.back();

  std::vector<std::uint32_t> degrees(n);
  for (auto& d : degrees) {
    const double u = rng.uniform() * total;
    const auto idx = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    d = kmin + static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(idx, cdf.size() - 1));
  }
  const auto sum = std::accumulate(degrees.begin(), degrees.end(), std::uint64_t{0});
  if (sum % 2 == 1) {
    // Parity fix on a random node that still has room.
    NodeId v = static_cast<NodeId>(rng.below(n));
    while (degrees[v] >= kmax) v = (v + 1) % n;
    ++degrees[v];
  }
  return degrees;
}

// Random stub matching. A candidate partner that would create a self-loop or
// a parallel edge is rejected and redrawn; an attempt fails when a stub runs
// out of partner draws.
bool pair_stubs(std::size_t n, const std::vector<std::uint32_t>& degrees, Rng& rng,
                std::vector<Edge>& edges) {
  constexpr int kPartnerDraws = 64;
  std::vector<NodeId> stubs;
  for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), degrees[v], v);
  edges.clear();
  std::unordered_map<std::uint64_t, bool> present;
  while (!stubs.empty()) {
    const NodeId a = stubs.back();
    stubs.pop_back();
    bool matched = false;
    for (int draw = 0; draw < kPartnerDraws && !stubs.empty(); ++draw) {
      const auto j = rng.below(stubs.size());
      const NodeId b = stubs[j];
      if (b == a || present.contains(edge_key(a, b))) continue;
      stubs[j] = stubs.back();
      stubs.pop_back();
      present.emplace(edge_key(a, b), true);
      edges.emplace_back(std::min(a, b), std::max(a, b));
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  std::sort(edges.begin(), edges.end());
  return true;
}

Snapshot gen_power_law(std::size_t n, const PowerLaw& pl, Rng& rng) {
  std::vector<Edge> edges;
  for (int attempt = 0; attempt < kMaxPairingRetries; ++attempt) {
    const auto degrees = sample_degrees(n, pl, rng);
    if (pair_stubs(n, degrees, rng, edges)) return Snapshot::from_edges(n, edges);
  }
  throw Error(ErrorCode::DegreeSequenceInfeasible,
              "no simple realization after " + std::to_string(kMaxPairingRetries) + " retries");
}

// Edge set with O(1) uniform sampling and removal.
class EdgePool {
 public:
  explicit EdgePool(const Snapshot& s) {
    for (const auto& e : s.edges()) insert(e.first, e.second);
  }

  std::size_t size() const { return edges_.size(); }
  const Edge& at(std::size_t i) const { return edges_[i]; }

  void insert(NodeId a, NodeId b) {
    index_.emplace(edge_key(a, b), edges_.size());
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }

  void erase(NodeId a, NodeId b) {
    const auto it = index_.find(edge_key(a, b));
    const std::size_t i = it->second;
    index_.erase(it);
    if (i + 1 != edges_.size()) {
      edges_[i] = edges_.back();
      index_[edge_key(edges_[i].first, edges_[i].second)] = i;
    }
    edges_.pop_back();
  }

 private:
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

Edge sample_absent_pair(const Snapshot& s, std::uint64_t absent, std::uint64_t total, Rng& rng) {
  const std::size_t n = s.node_count();
  if (absent * 20 >= total) {
    for (;;) {
      const auto a = static_cast<NodeId>(rng.below(n));
      const auto b = static_cast<NodeId>(rng.below(n));
      if (a != b && !s.has_edge(a, b)) return {std::min(a, b), std::max(a, b)};
    }
  }
  // Dense graph: index the absent pairs directly.
  std::uint64_t target = rng.below(absent);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (!s.has_edge(a, b) && target-- == 0) return {a, b};
  throw Error(ErrorCode::InvalidArgument, "absent pair count out of sync");
}

}  // namespace

void validate(const GenSpec& spec) {
  if (spec.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  if (!(spec.add_fraction >= 0.0 && spec.add_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "add_fraction must lie in [0,1]");
  if (const auto* er = std::get_if<ErdosRenyi>(&spec.topology)) {
    if (!(er->p > 0.0 && er->p <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "edge probability must lie in (0,1]");
  } else {
    const auto& pl = std::get<PowerLaw>(spec.topology);
    if (!(pl.exponent > 1.0)) throw Error(ErrorCode::InvalidArgument, "exponent must exceed 1");
    if (pl.min_degree < 1) throw Error(ErrorCode::InvalidArgument, "min_degree must be positive");
    if (pl.max_degree > 0 && pl.max_degree < pl.min_degree)
      throw Error(ErrorCode::InvalidArgument, "max_degree below min_degree");
    if (spec.n < 2) throw Error(ErrorCode::InvalidArgument, "power-law graphs need n >= 2");
  }
}

Snapshot gen_initial(const GenSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  if (const auto* er = std::get_if<ErdosRenyi>(&spec.topology))
    return gen_erdos_renyi(spec.n, er->p, rng);
  return gen_power_law(spec.n, std::get<PowerLaw>(spec.topology), rng);
}

DynamicGraph gen_events(const Snapshot& s0, const GenSpec& spec) {
  validate(spec);
  DynamicGraph dg{s0, {}};
  dg.events.reserve(spec.events);
  Rng rng(Rng::mix(spec.seed ^ kEventStream));
  Snapshot s = s0;
  EdgePool pool(s);
  const std::uint64_t n = s.node_count();
  const std::uint64_t total = n * (n - 1) / 2;
  if (total == 0) {
    if (spec.events > 0) throw Error(ErrorCode::InvalidArgument, "no node pairs to change");
    return dg;
  }

  for (std::size_t t = 1; t <= spec.events; ++t) {
    const std::uint64_t present = pool.size();
    const std::uint64_t absent = total - present;
    bool add = rng.uniform() < spec.add_fraction;
    if (add && absent == 0) add = false;
    if (!add && present == 0) add = true;

    EdgeEvent e;
    if (add) {
      const auto [a, b] = sample_absent_pair(s, absent, total, rng);
      e = EdgeEvent::add(a, b, t);
      pool.insert(a, b);
    } else {
      const auto [a, b] = pool.at(rng.below(present));
      e = EdgeEvent::remove(a, b, t);
      pool.erase(a, b);
    }
    s.apply(e);
    dg.events.push_back(e);
  }
  return dg;
}

DynamicGraph generate(const GenSpec& spec) { return gen_events(gen_initial(spec), spec); }

Splits split(std::size_t horizon, const SplitSpec& sp) {
  if (!(sp.train > 0 && sp.val > 0 && sp.test > 0) ||
      std::abs(sp.train + sp.val + sp.test - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "split fractions must be positive and sum to 1");
  // The epsilon absorbs representation error, e.g. 100 * (0.70 + 0.15).
  const auto boundary = [&](double cumulative) {
    const double raw = std::floor(double(horizon) * cumulative + 1e-9);
    return std::min<std::size_t>(static_cast<std::size_t>(raw), horizon);
  };
  const std::size_t b1 = boundary(sp.train);
  const std::size_t b2 = std::max(b1, boundary(sp.train + sp.val));
  return {EventRange{1, b1}, EventRange{b1 + 1, b2}, EventRange{b2 + 1, horizon}};
}

SplitSpec parse_split(std::string_view text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto colon = text.find(':', start);
    const auto field = text.substr(start, colon == std::string_view::npos ? text.npos : colon - start);
    try {
      parts.push_back(std::stod(std::string(field)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad split '" + std::string(text) + "'");
    }
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "split needs three ratios");
  const double sum = parts[0] + parts[1] + parts[2];
  if (!(sum > 0)) throw Error(ErrorCode::InvalidArgument, "split ratios must be positive");
  return {parts[0] / sum, parts[1] / sum, parts[2] / sum};
}

SizePreset size_preset(std::string_view name) {
  if (name == "small") return {100, 50000};
  if (name == "medium") return {1000, 100000};
  if (name == "large") return {10000, 5000};
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

}  // namespace dynmis
