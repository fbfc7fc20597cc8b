#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dynmis/rng.hpp"
#include "dynmis/tensor.hpp"

namespace dynmis::neural {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

/// Uniform(-k, k) with k = 1/sqrt(fan_in); `w` is (fan_out x fan_in).
void init_uniform(Tensor& w, Rng& rng);

/// y = W x (+ b). An empty bias tensor means no bias.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear make(std::size_t in, std::size_t out, bool with_bias);
  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  void forward(std::span<const double> x, std::span<double> y) const;
  /// Accumulates into grad; adds W^T dy into x_grad when it is non-empty.
  void backward(std::span<const double> x, std::span<const double> dy, Linear& grad,
                std::span<double> x_grad) const;
};

/// GRU with the reset gate applied to U_n h:
///   z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r)
///   n = tanh(W_n x + r * (U_n h) + b_n), h' = (1 - z) * n + z * h
struct GruParams {
  Tensor w_z, w_r, w_n;  // hidden x input
  Tensor u_z, u_r, u_n;  // hidden x hidden
  Tensor b_z, b_r, b_n;  // hidden

  static GruParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  static GruParams random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
  std::size_t input_dim() const { return w_z.cols(); }
  std::size_t hidden_dim() const { return w_z.rows(); }
};

struct GruCache {
  Vec x, h;
  Vec z, r, n, un_h;
  Vec out;
};

/// Throws DimensionMismatch when x or h have the wrong length.
Vec gru_cell(std::span<const double> x, std::span<const double> h, const GruParams& p);
void gru_forward(std::span<const double> x, std::span<const double> h, const GruParams& p,
                 GruCache& cache);
/// Accumulates parameter gradients; x_grad / h_grad are optional (empty).
void gru_backward(const GruCache& cache, std::span<const double> d_out, const GruParams& p,
                  GruParams& grad, std::span<double> x_grad, std::span<double> h_grad);

/// Linear layers with ReLU between them; no activation after the last.
struct Mlp {
  std::vector<Linear> layers;

  static Mlp make(std::span<const std::size_t> widths, Rng& rng);
  Mlp zeros_like() const;
  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
};

struct MlpCache {
  std::vector<Vec> inputs;  // input to each layer (post-activation)
  std::vector<Vec> pre;     // pre-activation output of each layer
};

Vec mlp_forward(const Mlp& mlp, std::span<const double> x, MlpCache* cache);
void mlp_backward(const Mlp& mlp, const MlpCache& cache, std::span<const double> d_out, Mlp& grad,
                  std::span<double> x_grad);

inline constexpr std::size_t kSignalDim = 3;

struct ModelDims {
  std::size_t memory_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 32;
  std::vector<std::size_t> mlp_hidden = {16};  // widths between embed_dim and the scalar output

  std::vector<std::size_t> mlp_widths() const;  // embed_dim, hidden..., 1
  bool operator==(const ModelDims&) const = default;
};

/// Every learnable tensor of the event-driven model.
struct ModelParams {
  ModelDims dims;
  GruParams gru;  // input memory_dim + kSignalDim, hidden memory_dim
  Tensor w1;      // hidden_dim x memory_dim
  Tensor w2;      // embed_dim x (hidden_dim + memory_dim + 1)
  Mlp mlp;

  /// Validates the dimension chain (strictly decreasing MLP widths ending at
  /// 1); throws DimensionMismatch.
  static void check_dims(const ModelDims& dims);
  static ModelParams random(const ModelDims& dims, Rng& rng);
  static ModelParams zeros(const ModelDims& dims);
  ModelParams zeros_like() const { return zeros(dims); }

  /// Tensors in checkpoint order: GRU (W_z W_r W_n U_z U_r U_n b_z b_r b_n),
  /// W1, W2, then each MLP layer's weight and bias.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;

  bool all_finite() const;
  bool operator==(const ModelParams&) const;
};

}  // namespace dynmis::neural
