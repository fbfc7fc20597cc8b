#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "graphs.hpp"

#include "dynmis/engine.hpp"
#include "dynmis/genesis.hpp"
#include "dynmis/gradcheck.hpp"
#include "dynmis/model.hpp"
#include "dynmis/rounding.hpp"

using namespace dynmis;
using namespace dynmis::testing;
using neural::ModelDims;
using neural::ModelParams;
using neural::Tensor;
using neural::Vec;

namespace {

ModelDims small_dims() {
  ModelDims d;
  d.memory_dim = 4;
  d.hidden_dim = 3;
  d.embed_dim = 5;
  d.mlp_hidden = {3};
  return d;
}

Config config_with(Variant v, std::uint32_t alpha, std::uint32_t beta, ModelDims dims = small_dims()) {
  Config cfg;
  cfg.variant = v;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.dims = dims;
  return cfg;
}

void randomize(ModelParams& p, Rng& rng, double scale) {
  for (Tensor* t : p.tensors())
    for (double& x : t->values()) x = rng.uniform(-scale, scale);
}

Tensor random_memories(std::size_t n, std::size_t dim, Rng& rng) {
  Tensor m = Tensor::matrix(n, dim);
  for (double& x : m.values()) x = rng.uniform(-1, 1);
  return m;
}

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  for (NodeId i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Independent loss evaluation: -sum p_v + c/2 * sum_v (1/d_v) sum_u p_u p_v.
double reference_total_loss(const std::vector<double>& p, const Snapshot& s, double c) {
  double reward = 0, penalty = 0;
  for (NodeId v = 0; v < s.node_count(); ++v) {
    reward += p[v];
    if (s.degree(v) == 0) continue;
    double inner = 0;
    for (NodeId u = 0; u < s.node_count(); ++u)
      if (s.has_edge(u, v)) inner += p[u] * p[v];
    penalty += inner / double(s.degree(v));
  }
  return -reward + c / 2 * penalty;
}

// Straight-line estimate: sigmoid(MLP(W2 [ReLU(sum W1 m(u)) || m(v) || d(v)])).
double reference_estimate(const ModelParams& p, const Tensor& mem, const Snapshot& s, NodeId v) {
  const auto H = p.dims.hidden_dim, M = p.dims.memory_dim;
  Vec combined;
  for (std::size_t i = 0; i < H; ++i) {
    double acc = 0;
    for (NodeId u : s.neighbors(v))
      for (std::size_t j = 0; j < M; ++j) acc += p.w1(i, j) * mem(u, j);
    combined.push_back(acc > 0 ? acc : 0);
  }
  for (std::size_t j = 0; j < M; ++j) combined.push_back(mem(v, j));
  combined.push_back(double(s.degree(v)));
  Vec x(p.w2.rows(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < combined.size(); ++j) x[i] += p.w2(i, j) * combined[j];
  for (std::size_t k = 0; k < p.mlp.layers.size(); ++k) {
    const auto& l = p.mlp.layers[k];
    Vec y(l.weight.rows());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = l.bias[i];
      for (std::size_t j = 0; j < x.size(); ++j) y[i] += l.weight(i, j) * x[j];
      if (k + 1 < p.mlp.layers.size()) y[i] = y[i] > 0 ? y[i] : 0;
    }
    x = y;
  }
  return 1 / (1 + std::exp(-x[0]));
}

// Literal violation removal: recount every candidate after each removal.
IndependentSet reference_round(const std::vector<double>& p, const Snapshot& s) {
  std::vector<char> in(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) in[v] = p[v] >= 0.5;
  for (;;) {
    long best = -1;
    std::size_t best_count = 0;
    for (std::size_t v = 0; v < p.size(); ++v) {
      if (!in[v]) continue;
      std::size_t count = 0;
      for (std::size_t w = 0; w < p.size(); ++w) count += in[w] && s.has_edge(NodeId(v), NodeId(w));
      if (count == 0) continue;
      const bool better = best < 0 || count > best_count ||
                          (count == best_count && (p[v] < p[best] || (p[v] == p[best] && long(v) > best)));
      if (better) {
        best = long(v);
        best_count = count;
      }
    }
    if (best < 0) break;
    in[best] = 0;
  }
  IndependentSet out;
  for (std::size_t v = 0; v < p.size(); ++v)
    if (in[v]) out.push_back(NodeId(v));
  return out;
}

}  // namespace

TEST_CASE("signal encoding") {
  CHECK(encode_signal(EventKind::Add, 0, 4) == Signal{{1, 0, -1}});
  CHECK(encode_signal(EventKind::Delete, 4, 4) == Signal{{0, 1, 1}});
  CHECK(encode_signal(EventKind::Delete, 2, 4) == Signal{{0, 1, 0}});
  CHECK(encode_signal(EventKind::Add, 0, 0) == Signal{{1, 0, -1}});
  try {
    encode_signal(EventKind::Add, 5, 4);
    FAIL("expected DistanceOutOfRadius");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DistanceOutOfRadius);
  }
  CHECK_THROWS_AS(encode_signal(EventKind::Add, 1, 0), Error);
}

TEST_CASE("configuration radii") {
  const Config b = make_config(Variant::Bcas, 8);
  CHECK(b.alpha == 2);
  CHECK(b.beta == 2);
  CHECK(b.c == 3.0);
  CHECK(make_config(Variant::Bcas, 2).alpha == 1);   // round(0.5) = 1
  CHECK(make_config(Variant::Bcas, 1).alpha == 1);   // floor at 1
  CHECK(make_config(Variant::Bcas, 10).alpha == 3);  // round(2.5) = 3
  const Config n = make_config(Variant::NoCas, 7);
  CHECK(n.alpha == 0);
  CHECK(n.beta == 7);
  CHECK(rescale_config(b, 16).alpha == 4);
  CHECK_THROWS_AS(make_config(Variant::Bcas, 8, 1.5), Error);
  CHECK_THROWS_AS(make_config(Variant::Bcas, 8, 0.25, 0.0), Error);
  CHECK(parse_variant("BCAS") == Variant::Bcas);
  CHECK(parse_variant("nocas") == Variant::NoCas);
  CHECK_THROWS_AS(parse_variant("cas"), Error);
}

TEST_CASE("memory updates") {
  SUBCASE("NoCAS touches exactly the two endpoints") {
    Rng rng(1);
    const ModelParams p = ModelParams::random(small_dims(), rng);
    const Config cfg = config_with(Variant::NoCas, 0, 3);
    const Snapshot s = apply_event(path_graph(6), EdgeEvent::add(0, 5));
    NodeState st{random_memories(6, 4, rng), std::vector<double>(6, 0.5)};
    const NodeState out = update_memories(st, s, EdgeEvent::add(0, 5), p, cfg);
    int changed = 0;
    for (NodeId v = 0; v < 6; ++v) {
      const bool same = std::ranges::equal(out.memory.row(v), st.memory.row(v));
      changed += !same;
      if (v != 0 && v != 5) CHECK(same);
    }
    CHECK(changed == 2);
  }
  SUBCASE("radius at least the diameter covers the component") {
    Rng rng(2);
    const ModelParams p = ModelParams::random(small_dims(), rng);
    Snapshot s = Snapshot::from_edges(8, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {5, 6}});
    const EdgeEvent e = EdgeEvent::add(3, 4);
    s.apply(e);
    const Config cfg = config_with(Variant::Bcas, diameter(s), diameter(s));
    NodeState st{random_memories(8, 4, rng), std::vector<double>(8, 0.5)};
    const NodeState out = update_memories(st, s, e, p, cfg);
    for (NodeId v = 0; v < 8; ++v)
      CHECK(std::ranges::equal(out.memory.row(v), st.memory.row(v)) == (v >= 5));
  }
  SUBCASE("zero GRU parameters halve updated memories") {
    const ModelParams p = ModelParams::zeros(small_dims());
    const Snapshot s = apply_event(path_graph(4), EdgeEvent::remove(2, 3));
    Rng rng(3);
    NodeState st{random_memories(4, 4, rng), std::vector<double>(4, 0.1)};
    const NodeState out = update_memories(st, s, EdgeEvent::remove(2, 3), p, config_with(Variant::Bcas, 1, 1));
    for (NodeId v : {1u, 2u, 3u})
      for (std::size_t j = 0; j < 4; ++j) CHECK(out.memory(v, j) == 0.5 * st.memory(v, j));
    CHECK(std::ranges::equal(out.memory.row(0), st.memory.row(0)));
  }
}

TEST_CASE("estimates") {
  SUBCASE("isolated node with zero parameters") {
    const ModelParams p = ModelParams::zeros(small_dims());
    const NodeState st = NodeState::zeros(3, 4);
    const NodeId affected[] = {2};
    const NodeState out = compute_estimates(st, Snapshot(3), affected, p);
    CHECK(out.estimate[2] == 0.5);
    CHECK(out.estimate[0] == 0.0);
  }
  SUBCASE("empty affected set") {
    Rng rng(4);
    const ModelParams p = ModelParams::random(small_dims(), rng);
    NodeState st{random_memories(5, 4, rng), {0.1, 0.2, 0.3, 0.4, 0.5}};
    CHECK(compute_estimates(st, path_graph(5), {}, p) == st);
  }
  SUBCASE("matches a straight-line evaluation") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      ModelParams p = ModelParams::random(small_dims(), rng);
      randomize(p, rng, 0.6);
      const Snapshot s = seed % 2 ? path_graph(3) : petersen_graph();
      NodeState st{random_memories(s.node_count(), 4, rng), std::vector<double>(s.node_count(), 0.0)};
      const auto nodes = all_nodes(s.node_count());
      const NodeState out = compute_estimates(st, s, nodes, p);
      for (NodeId v : nodes) CHECK(out.estimate[v] == doctest::Approx(reference_estimate(p, st.memory, s, v)).epsilon(1e-12));
      // Idempotence.
      CHECK(compute_estimates(out, s, nodes, p) == out);
    }
  }
}

TEST_CASE("node loss") {
  CHECK(node_loss(0.8, {}, 0, 3.0) == doctest::Approx(-0.8));
  const double one[] = {1.0};
  CHECK(node_loss(1.0, one, 1, 3.0) == doctest::Approx(0.5));
  const double zeros[] = {0.0, 0.0};
  CHECK(node_loss(0.0, zeros, 2, 3.0) == 0.0);
}

TEST_CASE("cumulative loss") {
  const Snapshot pet = petersen_graph();
  NodeState st = NodeState::zeros(10, 4);
  CHECK(cumulative_loss(st, pet, {}, 3.0) == 0.0);
  st.estimate.assign(10, 1.0);
  CHECK(cumulative_loss(st, pet, all_nodes(10), 3.0) == doctest::Approx(0.5 * 10));
  NodeState iso = NodeState::zeros(2, 4);
  iso.estimate[1] = 0.6;
  const NodeId one[] = {1};
  CHECK(cumulative_loss(iso, Snapshot(2), one, 3.0) == doctest::Approx(-0.6));

  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Snapshot s = random_graph(2 + rng.below(20), rng.uniform(0.05, 0.6), rng);
    NodeState r = NodeState::zeros(s.node_count(), 1);
    for (double& p : r.estimate) p = rng.uniform();
    const double c = rng.uniform(0.5, 5.0);
    CHECK(std::abs(cumulative_loss(r, s, all_nodes(s.node_count()), c) - reference_total_loss(r.estimate, s, c)) < 1e-10);
  }
}

TEST_CASE("loss gradient matches finite differences") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Snapshot s = random_graph(3 + rng.below(12), rng.uniform(0.1, 0.6), rng);
    NodeState st = NodeState::zeros(s.node_count(), 1);
    for (double& p : st.estimate) p = rng.uniform();
    std::vector<NodeId> affected;
    for (NodeId v = 0; v < s.node_count(); ++v)
      if (rng.uniform() < 0.5) affected.push_back(v);
    const auto g = loss_gradient(st.estimate, s, affected, 3.0);
    Vec sub;
    for (NodeId v : affected) sub.push_back(st.estimate[v]);
    const auto loss = [&] {
      for (std::size_t i = 0; i < affected.size(); ++i) st.estimate[affected[i]] = sub[i];
      return cumulative_loss(st, s, affected, 3.0);
    };
    CHECK(neural::check_gradient(loss, sub, g).max_rel_error < 1e-4);
  }
}

TEST_CASE("rounding examples") {
  CHECK(round_solution(std::vector<double>(3, 0.4), path_graph(3)).empty());
  CHECK(round_solution(std::vector<double>{0.9, 0.2, 0.8}, path_graph(3)) == IndependentSet{0, 2});
  CHECK(round_solution(std::vector<double>(3, 0.9), complete_graph(3)).size() == 1);
  // Ties on violations go to the lower estimate first.
  CHECK(round_solution(std::vector<double>{0.9, 0.7, 0.8}, complete_graph(3)) == IndependentSet{0});
  // Then to the larger id.
  CHECK(round_solution(std::vector<double>{0.9, 0.9, 0.9}, complete_graph(3)) == IndependentSet{0});
  // Center of a star goes first.
  CHECK(round_solution(std::vector<double>(5, 0.6), star_graph(4)) == IndependentSet{1, 2, 3, 4});
  CHECK(round_solution(std::vector<double>{0.5, 0.49}, path_graph(2)) == IndependentSet{0});
}

TEST_CASE("rounding is always independent") {
  Rng rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const Snapshot s = random_graph(1 + rng.below(30), rng.uniform(0.0, 0.7), rng);
    std::vector<double> p(s.node_count());
    for (double& x : p) x = rng.uniform();
    REQUIRE(is_independent(s, round_solution(p, s)));
  }
}

TEST_CASE("rounding matches the literal removal loop") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const Snapshot s = random_graph(1 + rng.below(25), rng.uniform(0.05, 0.6), rng);
    std::vector<double> p(s.node_count());
    // Coarse estimates so ties on estimate are common.
    for (double& x : p) x = double(rng.below(8)) / 8.0 + 0.0625;
    REQUIRE(round_solution(p, s) == reference_round(p, s));
  }
}

TEST_CASE("incremental rounding equals rounding from scratch") {
  GenSpec spec;
  spec.topology = ErdosRenyi{0.1};
  spec.n = 40;
  spec.events = 2000;
  spec.seed = 4;
  const DynamicGraph dg = generate(spec);
  Rng rng(1);
  std::vector<double> p(40);
  for (double& x : p) x = rng.uniform();
  Rounder r;
  Snapshot s = dg.initial;
  r.reset(s, p);
  for (const auto& e : dg.events) {
    s.apply(e);
    std::vector<NodeId> changed{e.u, e.v};
    const int k = int(rng.below(4));
    for (int i = 0; i < k; ++i) {
      const auto v = NodeId(rng.below(40));
      p[v] = rng.uniform();
      changed.push_back(v);
    }
    r.update(s, p, changed);
    REQUIRE(r.members() == round_solution(p, s));
  }
}

TEST_CASE("engine agrees with the functional operations") {
  Rng rng(21);
  const ModelParams p = ModelParams::random(small_dims(), rng);
  GenSpec spec;
  spec.topology = ErdosRenyi{0.12};
  spec.n = 30;
  spec.events = 200;
  spec.seed = 8;
  const DynamicGraph dg = generate(spec);
  const Config cfg = config_with(Variant::Bcas, 1, 1);
  const Tensor mem0 = random_memories(30, 4, rng);
  Engine eng(p, cfg, dg.initial, mem0);
  NodeState st{mem0, std::vector<double>(30, 0.0)};
  st = compute_estimates(st, dg.initial, all_nodes(30), p);
  CHECK(eng.state() == st);
  Snapshot s = dg.initial;
  for (const auto& e : dg.events) {
    s.apply(e);
    eng.step(e);
    st = update_memories(st, s, e, p, cfg);
    const NodeId ends[] = {e.u, e.v};
    std::vector<NodeId> affected;
    for (const auto& hd : hop_distances(s, ends, cfg.beta)) affected.push_back(hd.node);
    st = compute_estimates(st, s, affected, p);
    REQUIRE(eng.state() == st);
    REQUIRE(eng.solution() == round_solution(st, s));
    for (double x : st.estimate) REQUIRE((x >= 0.0 && x <= 1.0));
  }
}

TEST_CASE("locality of memories and estimates") {
  for (const Variant variant : {Variant::Bcas, Variant::NoCas}) {
    GenSpec spec;
    spec.topology = ErdosRenyi{0.06};
    spec.n = 60;
    spec.events = 500;
    spec.seed = 13;
    const DynamicGraph dg = generate(spec);
    Rng rng(3);
    const ModelParams p = ModelParams::random(small_dims(), rng);
    const Config cfg = variant == Variant::Bcas ? config_with(variant, 2, 2) : config_with(variant, 0, 3);
    Engine eng(p, cfg, dg.initial, random_memories(60, 4, rng));
    for (const auto& e : dg.events) {
      const NodeState before = eng.state();
      eng.step(e);
      const NodeId ends[] = {e.u, e.v};
      const auto far_alpha = hop_distances(eng.snapshot(), ends, cfg.alpha);
      const auto far_beta = hop_distances(eng.snapshot(), ends, cfg.beta);
      std::vector<char> in_alpha(60, 0), in_beta(60, 0);
      for (const auto& hd : far_alpha) in_alpha[hd.node] = 1;
      for (const auto& hd : far_beta) in_beta[hd.node] = 1;
      std::size_t changed_memories = 0;
      for (NodeId v = 0; v < 60; ++v) {
        const bool same_mem = std::ranges::equal(before.memory.row(v), eng.state().memory.row(v));
        if (!in_alpha[v]) REQUIRE(same_mem);
        if (!in_beta[v]) REQUIRE(before.estimate[v] == eng.state().estimate[v]);
        changed_memories += !same_mem;
      }
      if (variant == Variant::NoCas) {
        CHECK(eng.memory_ball().size() == 2);
        CHECK(changed_memories <= 2);
      }
    }
  }
}

TEST_CASE("full chain gradient matches finite differences") {
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    ModelParams p = ModelParams::random(small_dims(), rng);
    randomize(p, rng, 0.5);
    const Snapshot s = random_graph(8 + rng.below(6), 0.3, rng);
    const auto u = NodeId(rng.below(s.node_count()));
    auto v = NodeId(rng.below(s.node_count() - 1));
    if (v >= u) ++v;
    const EdgeEvent e = s.has_edge(u, v) ? EdgeEvent::remove(u, v) : EdgeEvent::add(u, v);
    const Config cfg = seed % 3 == 0 ? config_with(Variant::NoCas, 0, 2) : config_with(Variant::Bcas, 1 + seed % 2, 1 + seed % 2);
    const Engine base(p, cfg, s, random_memories(s.node_count(), 4, rng));

    Engine trained = base;
    ModelParams grad = p.zeros_like();
    trained.train_step(e, grad);

    const auto loss = [&] {
      Engine copy = base;
      copy.params_changed();
      copy.step(e);
      std::vector<NodeId> affected;
      for (const auto& hd : copy.estimate_ball()) affected.push_back(hd.node);
      return cumulative_loss(copy.state(), copy.snapshot(), affected, cfg.c);
    };
    auto params = p.tensors();
    auto grads = std::as_const(grad).tensors();
    double worst = 0;
    for (std::size_t k = 0; k < params.size(); ++k)
      worst = std::max(worst, neural::check_gradient(loss, params[k]->values(), grads[k]->values()).max_rel_error);
    if (worst >= 1e-4) {
      ++failures;
      MESSAGE("seed " << seed << " max relative error " << worst);
    }
  }
  CHECK(failures == 0);
}
