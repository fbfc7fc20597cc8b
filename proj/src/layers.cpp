#include "dynmis/layers.hpp"

#include <algorithm>
#include <string>

#include "dynmis/errors.hpp"

namespace dynmis::neural {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

void init_uniform(Tensor& w, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(w.cols()));
  for (auto& x : w.values()) x = rng.uniform(-k, k);
}

Linear Linear::make(std::size_t in, std::size_t out, bool with_bias) {
  Linear l;
  l.weight = Tensor::matrix(out, in);
  if (with_bias) l.bias = Tensor::vector(out);
  return l;
}

void Linear::forward(std::span<const double> x, std::span<double> y) const {
  matvec(weight, x, y);
  if (bias.size() != 0) add_into(y, bias.values());
}

void Linear::backward(std::span<const double> x, std::span<const double> dy, Linear& grad,
                      std::span<double> x_grad) const {
  outer_add(grad.weight, dy, x);
  if (bias.size() != 0) add_into(grad.bias.values(), dy);
  if (!x_grad.empty()) matvec_t_add(weight, dy, x_grad);
}

GruParams GruParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  GruParams p;
  for (Tensor* w : {&p.w_z, &p.w_r, &p.w_n}) *w = Tensor::matrix(hidden_dim, input_dim);
  for (Tensor* u : {&p.u_z, &p.u_r, &p.u_n}) *u = Tensor::matrix(hidden_dim, hidden_dim);
  for (Tensor* b : {&p.b_z, &p.b_r, &p.b_n}) *b = Tensor::vector(hidden_dim);
  return p;
}

GruParams GruParams::random(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  GruParams p = zeros(input_dim, hidden_dim);
  for (Tensor* w : {&p.w_z, &p.w_r, &p.w_n, &p.u_z, &p.u_r, &p.u_n}) init_uniform(*w, rng);
  return p;
}

void gru_forward(std::span<const double> x, std::span<const double> h, const GruParams& p,
                 GruCache& c) {
  const std::size_t hd = p.hidden_dim();
  require(x.size() == p.input_dim(), "GRU input length " + std::to_string(x.size()) +
                                         " != " + std::to_string(p.input_dim()));
  require(h.size() == hd, "GRU hidden length " + std::to_string(h.size()) + " != " + std::to_string(hd));
  c.x.assign(x.begin(), x.end());
  c.h.assign(h.begin(), h.end());
  c.z.assign(p.b_z.values().begin(), p.b_z.values().end());
  c.r.assign(p.b_r.values().begin(), p.b_r.values().end());
  c.n.assign(p.b_n.values().begin(), p.b_n.values().end());
  c.un_h.assign(hd, 0.0);
  matvec_add(p.w_z, x, c.z);
  matvec_add(p.u_z, h, c.z);
  matvec_add(p.w_r, x, c.r);
  matvec_add(p.u_r, h, c.r);
  matvec_add(p.w_n, x, c.n);
  matvec_add(p.u_n, h, c.un_h);
  c.out.resize(hd);
  for (std::size_t i = 0; i < hd; ++i) {
    c.z[i] = sigmoid(c.z[i]);
    c.r[i] = sigmoid(c.r[i]);
    c.n[i] = std::tanh(c.n[i] + c.r[i] * c.un_h[i]);
    c.out[i] = (1.0 - c.z[i]) * c.n[i] + c.z[i] * h[i];
  }
}

Vec gru_cell(std::span<const double> x, std::span<const double> h, const GruParams& p) {
  GruCache c;
  gru_forward(x, h, p, c);
  return std::move(c.out);
}

void gru_backward(const GruCache& c, std::span<const double> d_out, const GruParams& p,
                  GruParams& g, std::span<double> x_grad, std::span<double> h_grad) {
  const std::size_t hd = p.hidden_dim();
  Vec da_z(hd), da_r(hd), da_n(hd), da_un(hd);
  for (std::size_t i = 0; i < hd; ++i) {
    const double d = d_out[i];
    const double dn = d * (1.0 - c.z[i]);
    const double dz = d * (c.h[i] - c.n[i]);
    da_n[i] = dn * (1.0 - c.n[i] * c.n[i]);
    da_un[i] = da_n[i] * c.r[i];
    const double dr = da_n[i] * c.un_h[i];
    da_z[i] = dz * c.z[i] * (1.0 - c.z[i]);
    da_r[i] = dr * c.r[i] * (1.0 - c.r[i]);
    if (!h_grad.empty()) h_grad[i] += d * c.z[i];
  }
  outer_add(g.w_z, da_z, c.x);
  outer_add(g.w_r, da_r, c.x);
  outer_add(g.w_n, da_n, c.x);
  outer_add(g.u_z, da_z, c.h);
  outer_add(g.u_r, da_r, c.h);
  outer_add(g.u_n, da_un, c.h);
  add_into(g.b_z.values(), da_z);
  add_into(g.b_r.values(), da_r);
  add_into(g.b_n.values(), da_n);
  if (!x_grad.empty()) {
    matvec_t_add(p.w_z, da_z, x_grad);
    matvec_t_add(p.w_r, da_r, x_grad);
    matvec_t_add(p.w_n, da_n, x_grad);
  }
  if (!h_grad.empty()) {
    matvec_t_add(p.u_z, da_z, h_grad);
    matvec_t_add(p.u_r, da_r, h_grad);
    matvec_t_add(p.u_n, da_un, h_grad);
  }
}

Mlp Mlp::make(std::span<const std::size_t> widths, Rng& rng) {
  Mlp m;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    m.layers.push_back(Linear::make(widths[i], widths[i + 1], true));
    init_uniform(m.layers.back().weight, rng);
  }
  return m;
}

Mlp Mlp::zeros_like() const {
  Mlp m;
  for (const auto& l : layers) m.layers.push_back(Linear::make(l.in_dim(), l.out_dim(), true));
  return m;
}

Vec mlp_forward(const Mlp& mlp, std::span<const double> x, MlpCache* cache) {
  require(x.size() == mlp.in_dim(), "MLP input length mismatch");
  Vec in(x.begin(), x.end());
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    Vec out(mlp.layers[i].out_dim());
    mlp.layers[i].forward(in, out);
    if (cache) {
      cache->inputs.push_back(in);
      cache->pre.push_back(out);
    }
    if (i + 1 < mlp.layers.size())
      for (auto& v : out) v = relu(v);
    in = std::move(out);
  }
  return in;
}

void mlp_backward(const Mlp& mlp, const MlpCache& cache, std::span<const double> d_out, Mlp& grad,
                  std::span<double> x_grad) {
  Vec dy(d_out.begin(), d_out.end());
  for (std::size_t i = mlp.layers.size(); i-- > 0;) {
    if (i + 1 < mlp.layers.size())
      for (std::size_t k = 0; k < dy.size(); ++k)
        if (cache.pre[i][k] <= 0.0) dy[k] = 0.0;
    Vec dx(mlp.layers[i].in_dim(), 0.0);
    mlp.layers[i].backward(cache.inputs[i], dy, grad.layers[i], dx);
    dy = std::move(dx);
  }
  if (!x_grad.empty()) add_into(x_grad, dy);
}

std::vector<std::size_t> ModelDims::mlp_widths() const {
  std::vector<std::size_t> w{embed_dim};
  w.insert(w.end(), mlp_hidden.begin(), mlp_hidden.end());
  w.push_back(1);
  return w;
}

void ModelParams::check_dims(const ModelDims& dims) {
  require(dims.memory_dim > 0 && dims.hidden_dim > 0 && dims.embed_dim > 0,
          "model dimensions must be positive");
  const auto widths = dims.mlp_widths();
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    require(widths[i + 1] < widths[i], "MLP widths must strictly decrease to 1");
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  check_dims(dims);
  ModelParams p;
  p.dims = dims;
  p.gru = GruParams::zeros(dims.memory_dim + kSignalDim, dims.memory_dim);
  p.w1 = Tensor::matrix(dims.hidden_dim, dims.memory_dim);
  p.w2 = Tensor::matrix(dims.embed_dim, dims.hidden_dim + dims.memory_dim + 1);
  const auto widths = dims.mlp_widths();
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    p.mlp.layers.push_back(Linear::make(widths[i], widths[i + 1], true));
  return p;
}

ModelParams ModelParams::random(const ModelDims& dims, Rng& rng) {
  ModelParams p = zeros(dims);
  p.gru = GruParams::random(dims.memory_dim + kSignalDim, dims.memory_dim, rng);
  init_uniform(p.w1, rng);
  init_uniform(p.w2, rng);
  for (auto& l : p.mlp.layers) init_uniform(l.weight, rng);
  return p;
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out{&gru.w_z, &gru.w_r, &gru.w_n, &gru.u_z, &gru.u_r, &gru.u_n,
                           &gru.b_z, &gru.b_r, &gru.b_n, &w1, &w2};
  for (auto& l : mlp.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

bool ModelParams::all_finite() const {
  const auto ts = tensors();
  return std::all_of(ts.begin(), ts.end(), [](const Tensor* t) { return t->all_finite(); });
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (!(dims == other.dims)) return false;
  const auto a = tensors();
  const auto b = other.tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(*a[i] == *b[i])) return false;
  return true;
}

}  // namespace dynmis::neural
