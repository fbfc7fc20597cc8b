#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynmis/checkpoint.hpp"
#include "dynmis/genesis.hpp"

namespace dynmis {

struct Stabilization {
  std::size_t window = 10;
  double rel_tol = 1e-3;
};

struct TrainRunSpec {
  Config cfg;
  std::size_t epochs_max = 10;
  Stabilization stabilization;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
  std::uint64_t memory_nodes = 0;    // memory updates summed over the epoch
  std::uint64_t estimate_nodes = 0;  // estimate updates summed over the epoch
};

struct TrainLog {
  std::string phase;  // "pretrain" or "train"
  std::uint64_t seed = 0;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  std::string aborted;  // reason when the run was abandoned
};

nlohmann::json to_json(const TrainLog& log);

/// True iff (max - min) / (|mean| + 1e-12) over the last `window` entries is
/// below `rel_tol`. Histories shorter than the window are never stable.
bool stabilized(std::span<const double> history, std::size_t window, double rel_tol);

/// Memories after replaying G_0's edges (in `order`) as additions that only
/// update the two endpoints.
neural::Tensor construction_memories(const Snapshot& g0, std::span<const Edge> order,
                                     const neural::ModelParams& params);

/// Loss and gradient of one pre-training epoch: rebuild G_0 edge by edge from
/// zero memories, estimate every node and sum the node losses. Gradients
/// flow through each node's full chain of construction updates.
double pretrain_epoch(const Snapshot& g0, std::span<const Edge> order, const neural::ModelParams& params,
                      const Config& cfg, neural::ModelParams* grad, neural::Tensor* memories_out);

/// Runs one pre-training job per seed and returns the least-loss epoch of
/// the best seed. Seeds whose loss turns non-finite are dropped; throws
/// NonFiniteValue if every seed fails.
Checkpoint pretrain(const Snapshot& g0, const TrainRunSpec& spec, std::vector<TrainLog>* logs = nullptr);

/// Event-driven training over `range` starting from `ck`. Each epoch
/// restores the checkpoint memories at G_0, replays events before the range
/// without learning, then takes one Adam step per event in the range.
/// Returns the parameters after the least-loss epoch.
Checkpoint train(const Checkpoint& ck, const DynamicGraph& dg, EventRange range, const TrainRunSpec& spec,
                 TrainLog* log = nullptr);

/// Worker threads permitted by DYNMIS_THREADS (defaults to hardware
/// concurrency, at least 1).
std::size_t thread_budget();

}  // namespace dynmis
