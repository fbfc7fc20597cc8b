#include "dynmis/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>

#include "dynmis/engine.hpp"
#include "dynmis/rng.hpp"

namespace dynmis {

using neural::ModelParams;
using neural::Tensor;
using neural::Vec;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void adam_update(ModelParams& params, const ModelParams& grad, neural::AdamState& adam) {
  const auto p = params.tensors();
  const auto g = grad.tensors();
  neural::adam_step(p, g, adam);
}

void zero(ModelParams& grad) {
  for (auto* t : grad.tensors()) t->fill(0.0);
}

struct SeedOutcome {
  std::optional<Checkpoint> checkpoint;
  TrainLog log;
};

SeedOutcome pretrain_seed(const Snapshot& g0, const TrainRunSpec& spec, std::uint64_t seed) {
  SeedOutcome out;
  out.log.phase = "pretrain";
  out.log.seed = seed;
  Rng rng(seed);
  ModelParams params = ModelParams::random(spec.cfg.dims, rng);
  std::vector<Edge> order = g0.edges();
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  neural::AdamState adam{spec.cfg.adam, {}, {}, 0};
  ModelParams grad = params.zeros_like();
  std::vector<double> history;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= spec.epochs_max; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    zero(grad);
    Tensor memories;
    const double loss = pretrain_epoch(g0, order, params, spec.cfg, &grad, &memories);
    if (!std::isfinite(loss) || !grad.all_finite()) {
      out.log.aborted = "non-finite loss at epoch " + std::to_string(epoch);
      break;
    }
    if (loss < best) {
      best = loss;
      out.checkpoint = Checkpoint{params, memories, spec.cfg, {seed, epoch, loss}};
      out.log.best_epoch = epoch;
      out.log.best_loss = loss;
    }
    adam_update(params, grad, adam);
    history.push_back(loss);
    out.log.epochs.push_back({epoch, loss, seconds_since(start), 2 * order.size(), g0.node_count()});
    if (stabilized(history, spec.stabilization.window, spec.stabilization.rel_tol)) break;
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"loss", e.loss},
                      {"seconds", e.seconds},
                      {"memory_nodes", e.memory_nodes},
                      {"estimate_nodes", e.estimate_nodes}});
  nlohmann::json j{{"phase", log.phase},
                   {"seed", log.seed},
                   {"best_epoch", log.best_epoch},
                   {"best_loss", log.best_loss},
                   {"epochs", epochs}};
  if (!log.aborted.empty()) j["aborted"] = log.aborted;
  return j;
}

bool stabilized(std::span<const double> history, std::size_t window, double rel_tol) {
  if (window == 0 || history.size() < window) return false;
  const auto tail = history.last(window);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  double mean = 0.0;
  for (double x : tail) mean += x;
  mean /= double(window);
  return (*hi - *lo) / (std::abs(mean) + 1e-12) < rel_tol;
}

Tensor construction_memories(const Snapshot& g0, std::span<const Edge> order, const ModelParams& params) {
  Tensor memories = Tensor::matrix(g0.node_count(), params.dims.memory_dim);
  const Signal signal = encode_signal(EventKind::Add, 0, 0);
  for (const auto& [a, b] : order) {
    for (NodeId v : {a, b}) {
      auto row = memories.row(v);
      const Vec next = neural::gru_cell(memory_input(row, signal), row, params.gru);
      std::copy(next.begin(), next.end(), row.begin());
    }
  }
  return memories;
}

double pretrain_epoch(const Snapshot& g0, std::span<const Edge> order, const ModelParams& params,
                      const Config& cfg, ModelParams* grad, Tensor* memories_out) {
  const std::size_t n = g0.node_count();
  const std::size_t mem = params.dims.memory_dim;
  const std::size_t hidden = params.dims.hidden_dim;
  const Signal signal = encode_signal(EventKind::Add, 0, 0);

  // Construction replay; every node keeps its own chain of GRU caches.
  Tensor memory = Tensor::matrix(n, mem);
  std::vector<std::vector<neural::GruCache>> chain(n);
  for (const auto& [a, b] : order) {
    for (NodeId v : {a, b}) {
      auto row = memory.row(v);
      neural::GruCache cache;
      neural::gru_forward(memory_input(row, signal), row, params.gru, cache);
      std::copy(cache.out.begin(), cache.out.end(), row.begin());
      if (grad) chain[v].push_back(std::move(cache));
    }
  }

  Tensor projection = Tensor::matrix(n, hidden);
  for (NodeId u = 0; u < n; ++u) neural::matvec(params.w1, memory.row(u), projection.row(u));

  std::vector<NodeId> all(n);
  for (NodeId v = 0; v < n; ++v) all[v] = v;
  NodeState state{memory, std::vector<double>(n)};
  std::vector<EstimateCache> caches(grad ? n : 0);
  Vec agg(hidden);
  for (NodeId v = 0; v < n; ++v) {
    std::fill(agg.begin(), agg.end(), 0.0);
    for (NodeId u : g0.neighbors(v)) neural::add_into(agg, projection.row(u));
    state.estimate[v] = estimate_forward(params, agg, memory.row(v), double(g0.degree(v)),
                                         grad ? &caches[v] : nullptr);
  }
  const double loss = cumulative_loss(state, g0, all, cfg.c);
  if (memories_out) *memories_out = memory;
  if (!grad) return loss;

  const auto d_estimate = loss_gradient(state.estimate, g0, all, cfg.c);
  Tensor memory_grad = Tensor::matrix(n, mem);
  Tensor projection_grad = Tensor::matrix(n, hidden);
  Vec agg_grad(hidden);
  for (NodeId v = 0; v < n; ++v) {
    std::fill(agg_grad.begin(), agg_grad.end(), 0.0);
    estimate_backward(params, caches[v], d_estimate[v], *grad, memory_grad.row(v), agg_grad);
    for (NodeId u : g0.neighbors(v)) neural::add_into(projection_grad.row(u), agg_grad);
  }
  for (NodeId u = 0; u < n; ++u) {
    neural::outer_add(grad->w1, projection_grad.row(u), memory.row(u));
    neural::matvec_t_add(params.w1, projection_grad.row(u), memory_grad.row(u));
  }
  // Backpropagation through each construction chain; the memory enters both
  // the GRU input (first mem entries) and the hidden state.
  Vec d_h(mem);
  Vec d_x(mem + neural::kSignalDim);
  Vec d_prev(mem);
  for (NodeId v = 0; v < n; ++v) {
    auto row = memory_grad.row(v);
    d_h.assign(row.begin(), row.end());
    for (std::size_t k = chain[v].size(); k-- > 0;) {
      std::fill(d_x.begin(), d_x.end(), 0.0);
      std::fill(d_prev.begin(), d_prev.end(), 0.0);
      neural::gru_backward(chain[v][k], d_h, params.gru, grad->gru, d_x, d_prev);
      for (std::size_t i = 0; i < mem; ++i) d_h[i] = d_prev[i] + d_x[i];
    }
  }
  return loss;
}

std::size_t thread_budget() {
  std::size_t budget = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DYNMIS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) budget = static_cast<std::size_t>(v);
  }
  return budget;
}

Checkpoint pretrain(const Snapshot& g0, const TrainRunSpec& spec, std::vector<TrainLog>* logs) {
  check_config(spec.cfg);
  if (spec.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  if (spec.epochs_max < 1) throw Error(ErrorCode::InvalidArgument, "epochs_max must be >= 1");

  std::vector<SeedOutcome> outcomes(spec.seeds.size());
  const std::size_t workers = std::min(thread_budget(), spec.seeds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) outcomes[i] = pretrain_seed(g0, spec, spec.seeds[i]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < spec.seeds.size(); i += workers)
          outcomes[i] = pretrain_seed(g0, spec, spec.seeds[i]);
      });
  }

  std::optional<Checkpoint> best;
  for (auto& o : outcomes) {
    if (logs) logs->push_back(o.log);
    if (o.checkpoint && (!best || o.checkpoint->provenance.loss < best->provenance.loss))
      best = std::move(o.checkpoint);
  }
  if (!best) throw Error(ErrorCode::NonFiniteValue, "every pre-training seed diverged");
  return *best;
}

Checkpoint train(const Checkpoint& ck, const DynamicGraph& dg, EventRange range, const TrainRunSpec& spec,
                 TrainLog* log) {
  if (!(ck.params.dims == spec.cfg.dims))
    throw Error(ErrorCode::DimensionMismatch, "checkpoint dimensions differ from the run config");
  if (log) {
    log->phase = "train";
    log->seed = ck.provenance.seed;
  }
  if (range.empty()) return ck;
  if (range.last > dg.horizon()) throw Error(ErrorCode::InvalidArgument, "training range beyond horizon");

  ModelParams params = ck.params;
  ModelParams grad = params.zeros_like();
  neural::AdamState adam{spec.cfg.adam, {}, {}, 0};
  Engine engine(params, spec.cfg, dg.initial, ck.memories, /*maintain_solution=*/false);

  Checkpoint best = ck;
  best.cfg = spec.cfg;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  for (std::size_t epoch = 1; epoch <= spec.epochs_max; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    engine.reset(dg.initial, ck.memories);
    for (std::size_t t = 1; t < range.first; ++t) engine.step(dg.events[t - 1]);

    EpochLog entry{epoch, 0.0, 0.0, 0, 0};
    for (std::size_t t = range.first; t <= range.last; ++t) {
      zero(grad);
      const StepReport r = engine.train_step(dg.events[t - 1], grad);
      if (!grad.all_finite()) throw Error(ErrorCode::NonFiniteValue, "non-finite gradient at t=" + std::to_string(t));
      adam_update(params, grad, adam);
      engine.params_changed();
      entry.loss += r.loss;
      entry.memory_nodes += r.memory_nodes;
      entry.estimate_nodes += r.estimate_nodes;
    }
    if (!std::isfinite(entry.loss)) throw Error(ErrorCode::NonFiniteValue, "non-finite epoch loss");
    entry.seconds = seconds_since(start);
    history.push_back(entry.loss);
    if (log) log->epochs.push_back(entry);
    if (entry.loss < best_loss) {
      best_loss = entry.loss;
      best.params = params;
      best.provenance = {ck.provenance.seed, epoch, entry.loss};
      if (log) {
        log->best_epoch = epoch;
        log->best_loss = entry.loss;
      }
    }
    if (stabilized(history, spec.stabilization.window, spec.stabilization.rel_tol)) break;
  }
  return best;
}

}  // namespace dynmis
