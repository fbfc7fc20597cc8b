#include "dynmis/engine.hpp"

#include <algorithm>
#include <cmath>

namespace dynmis {

using neural::Vec;

Engine::Engine(const neural::ModelParams& params, Config cfg, Snapshot initial, neural::Tensor memories,
               bool maintain_solution)
    : params_(&params), cfg_(std::move(cfg)), maintain_solution_(maintain_solution) {
  check_config(cfg_);
  if (!(params.dims == cfg_.dims))
    throw Error(ErrorCode::DimensionMismatch, "parameters do not match configured dimensions");
  reset(std::move(initial), std::move(memories));
}

void Engine::reset(Snapshot initial, neural::Tensor memories) {
  const std::size_t n = initial.node_count();
  if (memories.rows() != n || memories.cols() != cfg_.dims.memory_dim)
    throw Error(ErrorCode::DimensionMismatch, "memory table does not match node count / memory_dim");
  snapshot_ = std::move(initial);
  state_.memory = std::move(memories);
  state_.estimate.assign(n, 0.0);
  alpha_search_ = BallSearch(n);
  beta_search_ = BallSearch(n);
  projection_ = neural::Tensor::matrix(n, cfg_.dims.hidden_dim);
  projection_stamp_.assign(n, 0);
  ++projection_epoch_;
  alpha_slot_.assign(n, -1);
  projection_grad_ = neural::Tensor::matrix(n, cfg_.dims.hidden_dim);
  projection_touched_.assign(n, 0);
  refresh_all();
}

std::span<const double> Engine::projected(NodeId u) {
  if (projection_stamp_[u] != projection_epoch_) {
    neural::matvec(params_->w1, state_.memory.row(u), projection_.row(u));
    projection_stamp_[u] = projection_epoch_;
  }
  return projection_.row(u);
}

void Engine::aggregate(NodeId v, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (NodeId u : snapshot_.neighbors(v)) neural::add_into(out, projected(u));
}

void Engine::refresh_all() {
  const std::size_t n = snapshot_.node_count();
  Vec agg(cfg_.dims.hidden_dim);
  for (NodeId v = 0; v < n; ++v) {
    aggregate(v, agg);
    state_.estimate[v] =
        estimate_forward(*params_, agg, state_.memory.row(v), double(snapshot_.degree(v)), nullptr);
  }
  if (maintain_solution_) rounder_.reset(snapshot_, state_.estimate);
}

StepReport Engine::step(const EdgeEvent& e) { return advance(e, nullptr); }

StepReport Engine::train_step(const EdgeEvent& e, neural::ModelParams& grad) { return advance(e, &grad); }

StepReport Engine::advance(const EdgeEvent& e, neural::ModelParams* grad) {
  snapshot_.apply(e);
  const NodeId endpoints[] = {e.u, e.v};
  memory_ball_ = alpha_search_.run(snapshot_, endpoints, cfg_.alpha);
  estimate_ball_ = beta_search_.run(snapshot_, endpoints, cfg_.beta);

  // Memory module.
  if (grad && gru_cache_.size() < memory_ball_.size()) gru_cache_.resize(memory_ball_.size());
  neural::GruCache scratch;
  for (std::size_t i = 0; i < memory_ball_.size(); ++i) {
    const auto [v, dist] = memory_ball_[i];
    auto row = state_.memory.row(v);
    auto& cache = grad ? gru_cache_[i] : scratch;
    neural::gru_forward(memory_input(row, encode_signal(e, dist, cfg_)), row, params_->gru, cache);
    std::copy(cache.out.begin(), cache.out.end(), row.begin());
    projection_stamp_[v] = 0;
    if (grad) alpha_slot_[v] = static_cast<std::int64_t>(i);
  }

  // Local aggregation module. All estimates are computed before any is
  // written, although estimates never feed other estimates directly.
  const std::size_t hidden = cfg_.dims.hidden_dim;
  if (grad && estimate_cache_.size() < estimate_ball_.size()) estimate_cache_.resize(estimate_ball_.size());
  Vec agg(hidden);
  for (std::size_t i = 0; i < estimate_ball_.size(); ++i) {
    const NodeId v = estimate_ball_[i].node;
    aggregate(v, agg);
    state_.estimate[v] = estimate_forward(*params_, agg, state_.memory.row(v), double(snapshot_.degree(v)),
                                          grad ? &estimate_cache_[i] : nullptr);
  }

  StepReport report;
  report.memory_nodes = memory_ball_.size();
  report.estimate_nodes = estimate_ball_.size();

  std::vector<NodeId> affected;
  affected.reserve(estimate_ball_.size());
  for (const auto& hd : estimate_ball_) affected.push_back(hd.node);

  if (grad) {
    report.loss = cumulative_loss(state_, snapshot_, affected, cfg_.c);
    if (!std::isfinite(report.loss)) throw Error(ErrorCode::NonFiniteValue, "non-finite batch loss");
    const auto d_estimate = loss_gradient(state_.estimate, snapshot_, affected, cfg_.c);

    std::vector<Vec> memory_grad(memory_ball_.size(), Vec(cfg_.dims.memory_dim, 0.0));
    std::vector<NodeId> touched;
    Vec own(cfg_.dims.memory_dim);
    Vec agg_grad(hidden);
    for (std::size_t i = 0; i < affected.size(); ++i) {
      const NodeId v = affected[i];
      std::fill(own.begin(), own.end(), 0.0);
      std::fill(agg_grad.begin(), agg_grad.end(), 0.0);
      estimate_backward(*params_, estimate_cache_[i], d_estimate[i], *grad, own, agg_grad);
      if (alpha_slot_[v] >= 0) neural::add_into(memory_grad[alpha_slot_[v]], own);
      for (NodeId u : snapshot_.neighbors(v)) {
        if (!projection_touched_[u]) {
          projection_touched_[u] = 1;
          touched.push_back(u);
        }
        neural::add_into(projection_grad_.row(u), agg_grad);
      }
    }
    for (NodeId u : touched) {
      auto d_proj = projection_grad_.row(u);
      neural::outer_add(grad->w1, d_proj, state_.memory.row(u));
      if (alpha_slot_[u] >= 0) neural::matvec_t_add(params_->w1, d_proj, memory_grad[alpha_slot_[u]]);
      std::fill(d_proj.begin(), d_proj.end(), 0.0);
      projection_touched_[u] = 0;
    }
    for (std::size_t i = 0; i < memory_ball_.size(); ++i) {
      neural::gru_backward(gru_cache_[i], memory_grad[i], params_->gru, grad->gru, {}, {});
      alpha_slot_[memory_ball_[i].node] = -1;
    }
  }

  if (maintain_solution_) {
    rounder_.update(snapshot_, state_.estimate, affected);
  }
  return report;
}

}  // namespace dynmis
