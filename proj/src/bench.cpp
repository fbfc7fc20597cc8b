#include "dynmis/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>
#include <thread>

#include "dynmis/engine.hpp"
#include "dynmis/trainer.hpp"

namespace dynmis {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void dependent_set(std::string_view method, std::size_t t) {
  throw Error(ErrorCode::InvalidArgument,
              "method " + std::string(method) + " produced a dependent set at t=" + std::to_string(t));
}

// Oracle solutions for every snapshot in the range, computed in parallel.
std::vector<ExactResult> oracle_sizes(const DynamicGraph& dg, EventRange test, double limit) {
  std::vector<ExactResult> out(test.size());
  Snapshot s = snapshot_at(dg, test.first - 1);
  std::vector<Snapshot> snaps;
  snaps.reserve(test.size());
  for (std::size_t t = test.first; t <= test.last; ++t) {
    s.apply(dg.events[t - 1]);
    snaps.push_back(s);
  }
  const std::size_t workers = std::min(thread_budget(), std::max<std::size_t>(1, snaps.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < snaps.size(); ++i) out[i] = exact_maxis(snaps[i], limit);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < snaps.size(); i += workers) out[i] = exact_maxis(snaps[i], limit);
      });
  }
  return out;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Bcas: return "bcas";
    case Method::NoCas: return "nocas";
    case Method::Greedy: return "greedy";
    case Method::Update: return "update";
    case Method::Exact: return "exact";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::Bcas, Method::NoCas, Method::Greedy, Method::Update, Method::Exact})
    if (to_string(m) == text) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(text) + "'");
}

std::vector<Method> parse_methods(std::string_view text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    if (!item.empty()) out.push_back(parse_method(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;  // ru_maxrss is in KiB on Linux
}

Aggregates aggregate(std::span<const EventRecord> records) {
  Aggregates a;
  if (records.empty()) return a;
  a.defined = true;
  double sum = 0.0;
  double seconds = 0.0;
  for (const auto& r : records) {
    sum += r.ratio;
    seconds += r.seconds;
    a.oracle_timeouts += r.oracle_optimal ? 0 : 1;
  }
  a.ratio_mean = sum / double(records.size());
  double var = 0.0;
  for (const auto& r : records) var += (r.ratio - a.ratio_mean) * (r.ratio - a.ratio_mean);
  a.ratio_std = std::sqrt(var / double(records.size()));
  a.mean_seconds = seconds / double(records.size());
  return a;
}

Config bench_config(const Checkpoint& ck, Variant variant, const Snapshot& g0) {
  Config cfg = ck.cfg;
  cfg.variant = variant;
  return rescale_config(cfg, diameter(g0));
}

neural::Tensor start_memories(const Checkpoint& ck, const Snapshot& g0) {
  if (ck.memories.rows() == g0.node_count()) return ck.memories;
  const auto order = g0.edges();
  return construction_memories(g0, order, ck.params);
}

std::vector<MethodResult> run_bench(const DynamicGraph& dg, EventRange test, const BenchOptions& opts) {
  if (!test.empty() && (test.first < 1 || test.last > dg.horizon()))
    throw Error(ErrorCode::InvalidArgument, "test range outside the event stream");
  for (Method m : opts.methods)
    if ((m == Method::Bcas || m == Method::NoCas) &&
        (!opts.checkpoints.contains(m) || opts.checkpoints.at(m) == nullptr))
      throw Error(ErrorCode::CheckpointMissing, "method " + std::string(to_string(m)) + " needs a checkpoint");

  std::vector<MethodResult> results;
  for (Method m : opts.methods) results.push_back({std::string(to_string(m)), {}, {}});
  if (test.empty()) {
    for (auto& r : results) r.aggregates.peak_rss_bytes = peak_rss_bytes();
    return results;
  }

  const auto oracle = oracle_sizes(dg, test, opts.oracle_time_limit);

  // Per-method incremental state, warmed up to G_{first-1}.
  const Snapshot start = snapshot_at(dg, test.first - 1);
  struct Learned {
    Config cfg;
    std::unique_ptr<Engine> engine;
  };
  std::vector<Learned> learned(opts.methods.size());
  std::vector<std::unique_ptr<UpdateState>> update(opts.methods.size());
  for (std::size_t k = 0; k < opts.methods.size(); ++k) {
    const Method m = opts.methods[k];
    if (m == Method::Bcas || m == Method::NoCas) {
      const Checkpoint& ck = *opts.checkpoints.at(m);
      learned[k].cfg = bench_config(ck, m == Method::Bcas ? Variant::Bcas : Variant::NoCas, dg.initial);
      learned[k].engine = std::make_unique<Engine>(ck.params, learned[k].cfg, dg.initial,
                                                   start_memories(ck, dg.initial));
      for (std::size_t t = 1; t < test.first; ++t) learned[k].engine->step(dg.events[t - 1]);
    } else if (m == Method::Update) {
      update[k] = std::make_unique<UpdateState>(dg.initial);
      for (std::size_t t = 1; t < test.first; ++t) update[k]->step(dg.events[t - 1]);
    }
  }

  Snapshot s = start;
  for (std::size_t t = test.first; t <= test.last; ++t) {
    const EdgeEvent& e = dg.events[t - 1];
    s.apply(e);
    const ExactResult& ref = oracle[t - test.first];
    const std::size_t oracle_size = std::max<std::size_t>(1, ref.set.size());
    for (std::size_t k = 0; k < opts.methods.size(); ++k) {
      const Method m = opts.methods[k];
      EventRecord rec;
      rec.t = t;
      rec.oracle_size = oracle_size;
      rec.oracle_optimal = ref.proven_optimal;
      IndependentSet set;
      const auto begin = Clock::now();
      switch (m) {
        case Method::Bcas:
        case Method::NoCas: {
          const StepReport r = learned[k].engine->step(e);
          rec.set_size = learned[k].engine->solution_size();
          rec.touched_memory_nodes = r.memory_nodes;
          rec.touched_estimate_nodes = r.estimate_nodes;
          break;
        }
        case Method::Update:
          update[k]->step(e);
          rec.set_size = update[k]->size();
          break;
        case Method::Greedy:
          set = greedy_maxis(s);
          rec.set_size = set.size();
          break;
        case Method::Exact:
          set = exact_maxis(s, opts.oracle_time_limit).set;
          rec.set_size = set.size();
          break;
      }
      const double elapsed = std::chrono::duration<double>(Clock::now() - begin).count();
      rec.seconds = opts.record_timing ? elapsed : 0.0;

      // Verification happens outside the timed region.
      if (m == Method::Bcas || m == Method::NoCas) set = learned[k].engine->solution();
      if (m == Method::Update) set = update[k]->members();
      if (set.size() != rec.set_size || !is_independent(s, set)) dependent_set(to_string(m), t);

      rec.ratio = double(rec.set_size) / double(rec.oracle_size);
      results[k].records.push_back(rec);
    }
  }
  const auto rss = peak_rss_bytes();
  for (auto& r : results) {
    r.aggregates = aggregate(r.records);
    r.aggregates.peak_rss_bytes = rss;
  }
  return results;
}

}  // namespace dynmis
