#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dynmis/adam.hpp"
#include "dynmis/dyngraph.hpp"
#include "dynmis/layers.hpp"
#include "dynmis/solvers.hpp"

namespace dynmis {

enum class Variant { Bcas, NoCas };

std::string_view to_string(Variant v);
/// Accepts "bcas" / "nocas" (case-insensitive); throws InvalidArgument.
Variant parse_variant(std::string_view text);

struct Config {
  Variant variant = Variant::Bcas;
  double gamma = 0.25;
  std::uint32_t alpha = 1;  // memory-update radius
  std::uint32_t beta = 1;   // estimate-update radius
  double c = 3.0;           // independence penalty weight
  neural::ModelDims dims;
  neural::AdamConfig adam;

  bool operator==(const Config&) const = default;
};

/// Derives the radii from diam(G_0): BCAS uses alpha = beta =
/// max(1, round(gamma * diam)); NoCAS uses alpha = 0, beta = diam.
Config make_config(Variant variant, std::uint32_t diameter0, double gamma = 0.25, double c = 3.0,
                   neural::ModelDims dims = {}, neural::AdamConfig adam = {});

/// Same variant and hyperparameters with radii re-derived for another G_0.
Config rescale_config(const Config& cfg, std::uint32_t diameter0);

/// Throws InvalidArgument when the invariants of the variant do not hold.
void check_config(const Config& cfg);

/// Event signal [enc(kind) || r]: additions [1,0], deletions [0,1];
/// r = 2 * dist / alpha - 1, or -1 when alpha = 0.
struct Signal {
  std::array<double, neural::kSignalDim> values{};

  bool operator==(const Signal&) const = default;
};

/// Throws DistanceOutOfRadius when dist > alpha.
Signal encode_signal(EventKind kind, std::uint32_t dist, std::uint32_t alpha);
inline Signal encode_signal(const EdgeEvent& e, std::uint32_t dist, const Config& cfg) {
  return encode_signal(e.kind, dist, cfg.alpha);
}

/// Per-node memory rows (n x memory_dim) and estimates in [0,1].
struct NodeState {
  neural::Tensor memory;
  std::vector<double> estimate;

  static NodeState zeros(std::size_t node_count, std::size_t memory_dim);
  std::size_t node_count() const { return estimate.size(); }
  bool operator==(const NodeState&) const = default;
};

/// GRU input for a node: its memory followed by the signal.
neural::Vec memory_input(std::span<const double> memory, const Signal& signal);

/// Replaces the memory of every node within alpha hops of e's endpoints
/// (on the post-event snapshot `s`) with GRU([m || signal], m).
NodeState update_memories(NodeState st, const Snapshot& s, const EdgeEvent& e,
                          const neural::ModelParams& params, const Config& cfg);

/// Recomputes the estimates of `affected` from the current memories of
/// their full neighborhoods; everything else is retained.
NodeState compute_estimates(NodeState st, const Snapshot& s, std::span<const NodeId> affected,
                            const neural::ModelParams& params);

/// Cached intermediates of one node's estimate.
struct EstimateCache {
  neural::Vec aggregate;  // sum over neighbors of W1 m(u), before ReLU
  neural::Vec combined;   // [ReLU(aggregate) || m(v) || d(v)]
  neural::Vec embedding;  // W2 combined
  neural::MlpCache mlp;
  double estimate = 0.0;
};

/// p = sigmoid(MLP(W2 [ReLU(aggregate) || memory || degree])).
double estimate_forward(const neural::ModelParams& params, std::span<const double> aggregate,
                        std::span<const double> memory, double degree, EstimateCache* cache);

/// Backpropagates d_estimate into parameter gradients, the node's own memory
/// gradient and the gradient of the pre-ReLU aggregate.
void estimate_backward(const neural::ModelParams& params, const EstimateCache& cache,
                       double d_estimate, neural::ModelParams& grad,
                       std::span<double> memory_grad, std::span<double> aggregate_grad);

/// -p_v + c / (2 d_v) * sum_u p_u p_v; the penalty is 0 for isolated nodes.
double node_loss(double p_v, std::span<const double> neighbor_estimates, std::size_t degree, double c);

/// Sum of node_loss over `affected`, reading neighbor estimates from `st`.
double cumulative_loss(const NodeState& st, const Snapshot& s, std::span<const NodeId> affected,
                       double c);

/// d(cumulative_loss)/d(p_v) for each affected node, in the order of
/// `affected`. Estimates of nodes outside `affected` are constants.
std::vector<double> loss_gradient(std::span<const double> estimate, const Snapshot& s,
                                  std::span<const NodeId> affected, double c);

/// Threshold at 0.5, then repeatedly drop the candidate with the most
/// candidate neighbors (ties: lower estimate, then larger id) until the
/// remaining candidates are independent.
IndependentSet round_solution(std::span<const double> estimate, const Snapshot& s);
inline IndependentSet round_solution(const NodeState& st, const Snapshot& s) {
  return round_solution(st.estimate, s);
}

}  // namespace dynmis
