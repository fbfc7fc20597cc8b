#pragma once

#include <cstdint>
#include <vector>

#include "dynmis/model.hpp"
#include "dynmis/rounding.hpp"

namespace dynmis {

struct StepReport {
  std::size_t memory_nodes = 0;    // nodes whose memory was updated (alpha ball)
  std::size_t estimate_nodes = 0;  // nodes whose estimate was recomputed (beta ball)
  double loss = 0.0;               // cumulative loss over the beta ball
};

/// Event-driven model state: snapshot, memories, estimates and (optionally)
/// the rounded solution. Per event: apply the event, update memories within
/// alpha hops, recompute estimates within beta hops, refresh the rounding.
///
/// The engine keeps a reference to `params`; call params_changed() after
/// modifying them.
class Engine {
 public:
  Engine(const neural::ModelParams& params, Config cfg, Snapshot initial, neural::Tensor memories,
         bool maintain_solution = true);

  /// Recomputes every estimate (and the rounding) from the current memories.
  void refresh_all();

  /// Restarts from a new initial snapshot and memories.
  void reset(Snapshot initial, neural::Tensor memories);

  StepReport step(const EdgeEvent& e);

  /// Forward pass plus gradient of the beta-ball cumulative loss. Memories
  /// from before this event are treated as constants. Gradients are
  /// accumulated into `grad`.
  StepReport train_step(const EdgeEvent& e, neural::ModelParams& grad);

  void params_changed() { ++projection_epoch_; }

  const Snapshot& snapshot() const { return snapshot_; }
  const NodeState& state() const { return state_; }
  const Config& config() const { return cfg_; }
  const std::vector<HopDistance>& memory_ball() const { return memory_ball_; }
  const std::vector<HopDistance>& estimate_ball() const { return estimate_ball_; }

  IndependentSet solution() const { return rounder_.members(); }
  std::size_t solution_size() const { return rounder_.size(); }

 private:
  StepReport advance(const EdgeEvent& e, neural::ModelParams* grad);
  std::span<const double> projected(NodeId u);
  void aggregate(NodeId v, std::span<double> out);

  const neural::ModelParams* params_;
  Config cfg_;
  Snapshot snapshot_;
  NodeState state_;
  bool maintain_solution_;
  Rounder rounder_;
  BallSearch alpha_search_;
  BallSearch beta_search_;
  std::vector<HopDistance> memory_ball_;
  std::vector<HopDistance> estimate_ball_;

  // W1 m(u) per node, valid while the stamp matches projection_epoch_.
  neural::Tensor projection_;
  std::vector<std::uint64_t> projection_stamp_;
  std::uint64_t projection_epoch_ = 1;

  // Training scratch.
  std::vector<neural::GruCache> gru_cache_;
  std::vector<EstimateCache> estimate_cache_;
  std::vector<std::int64_t> alpha_slot_;
  neural::Tensor projection_grad_;
  std::vector<std::uint8_t> projection_touched_;
};

}  // namespace dynmis
