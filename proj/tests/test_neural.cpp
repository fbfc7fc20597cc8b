#include <cmath>

#include "doctest.h"

#include "dynmis/adam.hpp"
#include "dynmis/errors.hpp"
#include "dynmis/gradcheck.hpp"
#include "dynmis/layers.hpp"

using namespace dynmis;
using namespace dynmis::neural;

namespace {

constexpr double kGradTol = 1e-4;

Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

void randomize(Tensor& t, Rng& rng, double scale = 1.0) {
  for (double& x : t.values()) x = rng.uniform(-scale, scale);
}

// Straight-line GRU evaluated entry by entry.
Vec reference_gru(const Vec& x, const Vec& h, const GruParams& p) {
  const std::size_t H = h.size(), I = x.size();
  Vec out(H);
  for (std::size_t i = 0; i < H; ++i) {
    double az = p.b_z[i], ar = p.b_r[i], an = p.b_n[i], un = 0;
    for (std::size_t j = 0; j < I; ++j) {
      az += p.w_z(i, j) * x[j];
      ar += p.w_r(i, j) * x[j];
      an += p.w_n(i, j) * x[j];
    }
    for (std::size_t j = 0; j < H; ++j) {
      az += p.u_z(i, j) * h[j];
      ar += p.u_r(i, j) * h[j];
      un += p.u_n(i, j) * h[j];
    }
    const double z = 1 / (1 + std::exp(-az));
    const double r = 1 / (1 + std::exp(-ar));
    const double n = std::tanh(an + r * un);
    out[i] = (1 - z) * n + z * h[i];
  }
  return out;
}

std::vector<Tensor*> gru_tensors(GruParams& p) {
  return {&p.w_z, &p.w_r, &p.w_n, &p.u_z, &p.u_r, &p.u_n, &p.b_z, &p.b_r, &p.b_n};
}

// Scalar loss used for checking layers: a fixed random projection of the output.
double project(const Vec& y, const Vec& w) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

}  // namespace

TEST_CASE("GRU with zero parameters halves the hidden state") {
  const GruParams p = GruParams::zeros(5, 4);
  const Vec x{0.3, -1.0, 2.0, 0.5, 7.0};
  const Vec h{1.0, -2.0, 0.25, 0.0};
  const Vec out = gru_cell(x, h, p);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(out[i] == 0.5 * h[i]);
  const Vec zero = gru_cell(x, Vec(4, 0.0), p);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("GRU matches a scalar reference evaluation") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    GruParams p = GruParams::random(7, 5, rng);
    for (Tensor* t : gru_tensors(p)) randomize(*t, rng, 0.8);
    const Vec x = random_vec(7, rng, 2.0), h = random_vec(5, rng, 2.0);
    const Vec got = gru_cell(x, h, p), want = reference_gru(x, h, p);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("GRU output stays within the hidden/candidate hull") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    GruParams p = GruParams::random(6, 4, rng);
    for (Tensor* t : gru_tensors(p)) randomize(*t, rng, 3.0);
    const Vec x = random_vec(6, rng, 5.0), h = random_vec(4, rng, 3.0);
    const Vec out = gru_cell(x, h, p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out[i]) <= std::max(std::abs(h[i]), 1.0) + 1e-15);
  }
}

TEST_CASE("GRU rejects mismatched dimensions") {
  const GruParams p = GruParams::zeros(5, 4);
  try {
    gru_cell(Vec(4, 0.0), Vec(4, 0.0), p);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(gru_cell(Vec(5, 0.0), Vec(3, 0.0), p), Error);
}

TEST_CASE("sigmoid derivative at zero") {
  // loss = sigmoid(w . x) at w = 0 has gradient 0.25 x.
  Linear lin = Linear::make(3, 1, false);
  const Vec x{1.0, -2.0, 0.5};
  Vec y(1);
  lin.forward(x, y);
  const double s = sigmoid(y[0]);
  const Vec dy{s * (1 - s)};
  Linear grad = Linear::make(3, 1, false);
  lin.backward(x, dy, grad, {});
  for (std::size_t j = 0; j < 3; ++j) CHECK(grad.weight[j] == 0.25 * x[j]);
}

TEST_CASE("linear layer gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    Linear lin = Linear::make(5, 4, true);
    randomize(lin.weight, rng);
    randomize(lin.bias, rng);
    Vec x = random_vec(5, rng);
    const Vec w = random_vec(4, rng);
    const auto loss = [&] {
      Vec y(4);
      lin.forward(x, y);
      return project(y, w);
    };
    Linear grad = Linear::make(5, 4, true);
    Vec xg(5, 0.0);
    lin.backward(x, w, grad, xg);
    CHECK(check_gradient(loss, lin.weight.values(), grad.weight.values()).max_rel_error < kGradTol);
    CHECK(check_gradient(loss, lin.bias.values(), grad.bias.values()).max_rel_error < kGradTol);
    CHECK(check_gradient(loss, x, xg).max_rel_error < kGradTol);
  }
}

TEST_CASE("GRU gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    GruParams p = GruParams::random(6, 4, rng);
    for (Tensor* t : gru_tensors(p)) randomize(*t, rng, 0.7);
    Vec x = random_vec(6, rng), h = random_vec(4, rng);
    const Vec w = random_vec(4, rng);
    const auto loss = [&] { return project(gru_cell(x, h, p), w); };
    GruCache cache;
    gru_forward(x, h, p, cache);
    GruParams grad = GruParams::zeros(6, 4);
    Vec xg(6, 0.0), hg(4, 0.0);
    gru_backward(cache, w, p, grad, xg, hg);
    auto params = gru_tensors(p);
    auto grads = gru_tensors(grad);
    for (std::size_t k = 0; k < params.size(); ++k)
      CHECK(check_gradient(loss, params[k]->values(), grads[k]->values()).max_rel_error < kGradTol);
    CHECK(check_gradient(loss, x, xg).max_rel_error < kGradTol);
    CHECK(check_gradient(loss, h, hg).max_rel_error < kGradTol);
  }
}

TEST_CASE("MLP gradients match finite differences") {
  const std::size_t widths[] = {8, 5, 3, 1};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    Mlp mlp = Mlp::make(widths, rng);
    for (auto& l : mlp.layers) randomize(l.bias, rng, 0.5);
    Vec x = random_vec(8, rng, 2.0);
    const auto loss = [&] { return mlp_forward(mlp, x, nullptr)[0]; };
    MlpCache cache;
    mlp_forward(mlp, x, &cache);
    Mlp grad = mlp.zeros_like();
    Vec xg(8, 0.0);
    const Vec d{1.0};
    mlp_backward(mlp, cache, d, grad, xg);
    for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
      CHECK(check_gradient(loss, mlp.layers[k].weight.values(), grad.layers[k].weight.values()).max_rel_error < kGradTol);
      CHECK(check_gradient(loss, mlp.layers[k].bias.values(), grad.layers[k].bias.values()).max_rel_error < kGradTol);
    }
    CHECK(check_gradient(loss, x, xg).max_rel_error < kGradTol);
  }
}

TEST_CASE("zero input through a bias-free ReLU chain") {
  const std::size_t widths[] = {4, 3, 1};
  Rng rng(3);
  Mlp mlp = Mlp::make(widths, rng);
  const Vec x(4, 0.0);
  MlpCache cache;
  CHECK(mlp_forward(mlp, x, &cache)[0] == 0.0);
  Mlp grad = mlp.zeros_like();
  const Vec d{1.0};
  mlp_backward(mlp, cache, d, grad, {});
  for (double g : grad.layers[0].weight.values()) CHECK(g == 0.0);
}

TEST_CASE("initialization") {
  Rng rng(1);
  Tensor w = Tensor::matrix(10, 25);
  init_uniform(w, rng);
  for (double v : w.values()) CHECK(std::abs(v) <= 0.2);
  const Linear lin = Linear::make(25, 10, true);
  for (double b : lin.bias.values()) CHECK(b == 0.0);

  ModelDims dims;
  Rng a(9), b(9);
  CHECK(ModelParams::random(dims, a) == ModelParams::random(dims, b));
  CHECK(dims.mlp_widths() == std::vector<std::size_t>{32, 16, 1});
}

TEST_CASE("model dimension chain") {
  ModelDims bad;
  bad.mlp_hidden = {40};
  CHECK_THROWS_AS(ModelParams::check_dims(bad), Error);
  ModelDims ok;
  ok.memory_dim = 4;
  ok.hidden_dim = 3;
  ok.embed_dim = 6;
  ok.mlp_hidden = {4, 2};
  const ModelParams p = ModelParams::zeros(ok);
  CHECK(p.gru.input_dim() == 4 + kSignalDim);
  CHECK(p.gru.hidden_dim() == 4);
  CHECK(p.w1.rows() == 3);
  CHECK(p.w1.cols() == 4);
  CHECK(p.w2.rows() == 6);
  CHECK(p.w2.cols() == 3 + 4 + 1);
  CHECK(p.mlp.layers.size() == 3);
  CHECK(p.tensors().size() == 9 + 2 + 2 * 3);
}

TEST_CASE("Adam") {
  SUBCASE("zero gradient leaves parameters in place and decays moments") {
    Tensor w({2});
    w[0] = 1.0;
    w[1] = -2.0;
    Tensor g({2});
    AdamState st;
    Tensor* params[] = {&w};
    const Tensor* grads[] = {&g};
    g[0] = 1.0;
    adam_step(params, grads, st);
    const double m = st.first[0][0], v = st.second[0][0];
    const Tensor after_one = w;
    g.fill(0.0);
    adam_step(params, grads, st);
    CHECK(st.first[0][0] == doctest::Approx(0.9 * m));
    CHECK(st.second[0][0] == doctest::Approx(0.999 * v));
    CHECK(w[1] == after_one[1]);
    CHECK(st.step == 2);
  }
  SUBCASE("first step with unit gradient moves by lr") {
    Tensor w({1});
    Tensor g({1});
    g[0] = 1.0;
    AdamState st;
    Tensor* params[] = {&w};
    const Tensor* grads[] = {&g};
    adam_step(params, grads, st);
    // m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
    CHECK(w[0] == doctest::Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("constant gradient gives steps of size lr") {
    Tensor w({1});
    Tensor g({1});
    g[0] = -0.37;
    AdamState st;
    Tensor* params[] = {&w};
    const Tensor* grads[] = {&g};
    double prev = 0;
    for (int i = 0; i < 500; ++i) {
      prev = w[0];
      adam_step(params, grads, st);
    }
    CHECK(w[0] - prev == doctest::Approx(1e-3).epsilon(1e-6));
  }
  SUBCASE("shape mismatch") {
    Tensor w({2});
    Tensor g({3});
    AdamState st;
    Tensor* params[] = {&w};
    const Tensor* grads[] = {&g};
    CHECK_THROWS_AS(adam_step(params, grads, st), Error);
  }
}

TEST_CASE("gradient checker catches wrong gradients") {
  Vec x{1.0, 2.0};
  const auto loss = [&] { return x[0] * x[0] + 3 * x[1]; };
  const Vec right{2.0, 3.0};
  const Vec wrong{2.0, 3.1};
  CHECK(check_gradient(loss, x, right).max_rel_error < 1e-8);
  const auto r = check_gradient(loss, x, wrong);
  CHECK(r.max_rel_error > 1e-2);
  CHECK(r.worst_index == 1);
  CHECK(x == Vec{1.0, 2.0});
}
