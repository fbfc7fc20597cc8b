#include "dynmis/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace dynmis {

using neural::ModelParams;
using neural::Vec;

std::string_view to_string(Variant v) { return v == Variant::Bcas ? "bcas" : "nocas"; }

Variant parse_variant(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "bcas") return Variant::Bcas;
  if (lower == "nocas" || lower == "no-cas") return Variant::NoCas;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(text) + "'");
}

Config make_config(Variant variant, std::uint32_t diameter0, double gamma, double c,
                   neural::ModelDims dims, neural::AdamConfig adam) {
  Config cfg;
  cfg.variant = variant;
  cfg.gamma = gamma;
  cfg.c = c;
  cfg.dims = std::move(dims);
  cfg.adam = adam;
  if (variant == Variant::Bcas) {
    const auto radius = static_cast<std::uint32_t>(std::lround(gamma * diameter0));
    cfg.alpha = cfg.beta = std::max<std::uint32_t>(1, radius);
  } else {
    cfg.alpha = 0;
    cfg.beta = diameter0;
  }
  check_config(cfg);
  return cfg;
}

Config rescale_config(const Config& cfg, std::uint32_t diameter0) {
  return make_config(cfg.variant, diameter0, cfg.gamma, cfg.c, cfg.dims, cfg.adam);
}

void check_config(const Config& cfg) {
  if (!(cfg.c > 0)) throw Error(ErrorCode::InvalidArgument, "c must be positive");
  if (cfg.variant == Variant::Bcas) {
    if (!(cfg.gamma > 0 && cfg.gamma <= 1))
      throw Error(ErrorCode::InvalidArgument, "BCAS needs 0 < gamma <= 1");
    if (cfg.alpha != cfg.beta) throw Error(ErrorCode::InvalidArgument, "BCAS needs alpha == beta");
  } else if (cfg.alpha != 0) {
    throw Error(ErrorCode::InvalidArgument, "NoCAS needs alpha == 0");
  }
  ModelParams::check_dims(cfg.dims);
}

Signal encode_signal(EventKind kind, std::uint32_t dist, std::uint32_t alpha) {
  if (dist > alpha)
    throw Error(ErrorCode::DistanceOutOfRadius,
                "distance " + std::to_string(dist) + " beyond radius " + std::to_string(alpha));
  Signal s;
  s.values[0] = kind == EventKind::Add ? 1.0 : 0.0;
  s.values[1] = kind == EventKind::Add ? 0.0 : 1.0;
  s.values[2] = alpha == 0 ? -1.0 : 2.0 * double(dist) / double(alpha) - 1.0;
  return s;
}

NodeState NodeState::zeros(std::size_t node_count, std::size_t memory_dim) {
  return {neural::Tensor::matrix(node_count, memory_dim), std::vector<double>(node_count, 0.0)};
}

Vec memory_input(std::span<const double> memory, const Signal& signal) {
  Vec x(memory.begin(), memory.end());
  x.insert(x.end(), signal.values.begin(), signal.values.end());
  return x;
}

NodeState update_memories(NodeState st, const Snapshot& s, const EdgeEvent& e,
                          const ModelParams& params, const Config& cfg) {
  const NodeId endpoints[] = {e.u, e.v};
  for (const auto& [v, dist] : hop_distances(s, endpoints, cfg.alpha)) {
    auto row = st.memory.row(v);
    const Vec next = neural::gru_cell(memory_input(row, encode_signal(e, dist, cfg)), row, params.gru);
    std::copy(next.begin(), next.end(), row.begin());
  }
  return st;
}

double estimate_forward(const ModelParams& params, std::span<const double> aggregate,
                        std::span<const double> memory, double degree, EstimateCache* cache) {
  Vec combined;
  combined.reserve(aggregate.size() + memory.size() + 1);
  for (double a : aggregate) combined.push_back(neural::relu(a));
  combined.insert(combined.end(), memory.begin(), memory.end());
  combined.push_back(degree);
  Vec embedding(params.w2.rows());
  neural::matvec(params.w2, combined, embedding);
  const Vec out = neural::mlp_forward(params.mlp, embedding, cache ? &cache->mlp : nullptr);
  const double p = neural::sigmoid(out[0]);
  if (cache) {
    cache->aggregate.assign(aggregate.begin(), aggregate.end());
    cache->combined = std::move(combined);
    cache->embedding = std::move(embedding);
    cache->estimate = p;
  }
  return p;
}

void estimate_backward(const ModelParams& params, const EstimateCache& cache, double d_estimate,
                       ModelParams& grad, std::span<double> memory_grad,
                       std::span<double> aggregate_grad) {
  const double d_out[] = {d_estimate * cache.estimate * (1.0 - cache.estimate)};
  Vec d_embedding(cache.embedding.size(), 0.0);
  neural::mlp_backward(params.mlp, cache.mlp, d_out, grad.mlp, d_embedding);
  neural::outer_add(grad.w2, d_embedding, cache.combined);
  Vec d_combined(cache.combined.size(), 0.0);
  neural::matvec_t_add(params.w2, d_embedding, d_combined);
  const std::size_t hidden = cache.aggregate.size();
  for (std::size_t i = 0; i < hidden; ++i)
    if (cache.aggregate[i] > 0.0) aggregate_grad[i] += d_combined[i];
  for (std::size_t i = 0; i < memory_grad.size(); ++i) memory_grad[i] += d_combined[hidden + i];
}

NodeState compute_estimates(NodeState st, const Snapshot& s, std::span<const NodeId> affected,
                            const ModelParams& params) {
  const std::size_t hidden = params.w1.rows();
  Vec projected(hidden);
  Vec aggregate(hidden);
  // Reads come from a frozen copy so the result does not depend on the
  // order of `affected`.
  const neural::Tensor& memory = st.memory;
  std::vector<std::pair<NodeId, double>> fresh;
  for (NodeId v : affected) {
    std::fill(aggregate.begin(), aggregate.end(), 0.0);
    for (NodeId u : s.neighbors(v)) {
      neural::matvec(params.w1, memory.row(u), projected);
      neural::add_into(aggregate, projected);
    }
    fresh.emplace_back(v, estimate_forward(params, aggregate, memory.row(v), double(s.degree(v)), nullptr));
  }
  for (const auto& [v, p] : fresh) st.estimate[v] = p;
  return st;
}

double node_loss(double p_v, std::span<const double> neighbor_estimates, std::size_t degree, double c) {
  if (degree == 0) return -p_v;
  double sum = 0.0;
  for (double p_u : neighbor_estimates) sum += p_u * p_v;
  return -p_v + c / (2.0 * double(degree)) * sum;
}

double cumulative_loss(const NodeState& st, const Snapshot& s, std::span<const NodeId> affected, double c) {
  double total = 0.0;
  std::vector<double> neighbor;
  for (NodeId v : affected) {
    neighbor.clear();
    for (NodeId u : s.neighbors(v)) neighbor.push_back(st.estimate[u]);
    total += node_loss(st.estimate[v], neighbor, s.degree(v), c);
  }
  return total;
}

std::vector<double> loss_gradient(std::span<const double> estimate, const Snapshot& s,
                                  std::span<const NodeId> affected, double c) {
  std::vector<std::int64_t> slot(s.node_count(), -1);
  for (std::size_t i = 0; i < affected.size(); ++i) slot[affected[i]] = static_cast<std::int64_t>(i);
  std::vector<double> grad(affected.size(), 0.0);
  for (std::size_t i = 0; i < affected.size(); ++i) {
    const NodeId v = affected[i];
    const std::size_t d = s.degree(v);
    grad[i] += -1.0;
    if (d == 0) continue;
    const double w = c / (2.0 * double(d));
    double sum = 0.0;
    for (NodeId u : s.neighbors(v)) {
      sum += estimate[u];
      if (slot[u] >= 0) grad[slot[u]] += w * estimate[v];
    }
    grad[i] += w * sum;
  }
  return grad;
}

}  // namespace dynmis
