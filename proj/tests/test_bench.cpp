#include <sstream>

#include "doctest.h"
#include "graphs.hpp"

#include "dynmis/bench.hpp"
#include "dynmis/report.hpp"
#include "dynmis/trainer.hpp"

using namespace dynmis;

namespace {

DynamicGraph er_stream(std::size_t n, double p, std::size_t events, std::uint64_t seed) {
  GenSpec spec;
  spec.topology = ErdosRenyi{p};
  spec.n = n;
  spec.events = events;
  spec.seed = seed;
  return generate(spec);
}

Checkpoint tiny_checkpoint(const DynamicGraph& dg, Variant v) {
  neural::ModelDims dims;
  dims.memory_dim = 6;
  dims.hidden_dim = 5;
  dims.embed_dim = 6;
  dims.mlp_hidden = {4};
  TrainRunSpec spec;
  spec.cfg = make_config(v, diameter(dg.initial), 0.25, 3.0, dims);
  spec.cfg.adam.lr = 1e-2;
  spec.epochs_max = 30;
  spec.seeds = {1};
  return pretrain(dg.initial, spec);
}

EventRecord record(std::size_t t, std::size_t size, std::size_t oracle, double seconds) {
  EventRecord r;
  r.t = t;
  r.set_size = size;
  r.oracle_size = oracle;
  r.ratio = double(size) / double(oracle);
  r.seconds = seconds;
  return r;
}

MethodResult result(std::string name, std::vector<EventRecord> records) {
  MethodResult m{std::move(name), std::move(records), {}};
  m.aggregates = aggregate(m.records);
  return m;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_methods("bcas,nocas,greedy,update,exact") ==
        std::vector<Method>{Method::Bcas, Method::NoCas, Method::Greedy, Method::Update, Method::Exact});
  CHECK(to_string(Method::Update) == "update");
  CHECK_THROWS_AS(parse_method("gurobi"), Error);
}

TEST_CASE("exact against the oracle is identically 1") {
  const DynamicGraph dg = er_stream(40, 0.1, 60, 2);
  BenchOptions opts;
  opts.methods = {Method::Exact, Method::Greedy, Method::Update};
  opts.oracle_time_limit = kNoTimeLimit;
  const auto res = run_bench(dg, EventRange{11, 60}, opts);
  REQUIRE(res.size() == 3);
  REQUIRE(res[0].records.size() == 50);
  for (const auto& r : res[0].records) CHECK(r.ratio == 1.0);
  CHECK(res[0].aggregates.ratio_mean == 1.0);
  CHECK(res[0].aggregates.ratio_std == 0.0);
  for (const auto& r : res[1].records) {
    CHECK(r.ratio <= 1.0);
    CHECK(r.seconds >= 0.0);
    CHECK(r.oracle_optimal);
  }
  CHECK(res[0].records.front().t == 11);
  CHECK(res[0].records.back().t == 60);
}

TEST_CASE("empty range yields undefined aggregates") {
  const DynamicGraph dg = er_stream(20, 0.1, 10, 3);
  BenchOptions opts;
  opts.methods = {Method::Greedy};
  const auto res = run_bench(dg, EventRange{11, 10}, opts);
  REQUIRE(res.size() == 1);
  CHECK(res[0].records.empty());
  CHECK_FALSE(res[0].aggregates.defined);
  const std::string table = emit_report(res, ReportFormat::Table);
  CHECK(table.find("n/a (empty)") != std::string::npos);
}

TEST_CASE("learned methods need a checkpoint") {
  const DynamicGraph dg = er_stream(20, 0.1, 10, 3);
  BenchOptions opts;
  opts.methods = {Method::Bcas};
  try {
    run_bench(dg, EventRange{1, 10}, opts);
    FAIL("expected CheckpointMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CheckpointMissing);
  }
}

TEST_CASE("learned methods: touched counts and radii") {
  const DynamicGraph dg = er_stream(60, 0.06, 200, 5);
  const Checkpoint bcas = tiny_checkpoint(dg, Variant::Bcas);
  const Checkpoint nocas = tiny_checkpoint(dg, Variant::NoCas);
  BenchOptions opts;
  opts.methods = {Method::Bcas, Method::NoCas};
  opts.checkpoints = {{Method::Bcas, &bcas}, {Method::NoCas, &nocas}};
  const auto res = run_bench(dg, EventRange{101, 200}, opts);
  const Config cfg = bench_config(bcas, Variant::Bcas, dg.initial);
  Snapshot s = snapshot_at(dg, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const EdgeEvent& e = dg.events[100 + i];
    s.apply(e);
    const NodeId ends[] = {e.u, e.v};
    CHECK(res[0].records[i].touched_estimate_nodes == hop_distances(s, ends, cfg.beta).size());
    CHECK(res[1].records[i].touched_memory_nodes == 2);
    CHECK(res[0].records[i].ratio <= 1.0);
  }
  CHECK(res[0].aggregates.defined);
}

TEST_CASE("start memories") {
  const DynamicGraph dg = er_stream(30, 0.1, 0, 5);
  const Checkpoint ck = tiny_checkpoint(dg, Variant::Bcas);
  CHECK(start_memories(ck, dg.initial) == ck.memories);
  const DynamicGraph other = er_stream(45, 0.1, 0, 6);
  const auto order = other.initial.edges();
  CHECK(start_memories(ck, other.initial) == construction_memories(other.initial, order, ck.params));
}

TEST_CASE("timing can be switched off for reproducible reports") {
  const DynamicGraph dg = er_stream(30, 0.12, 40, 8);
  BenchOptions opts;
  opts.methods = {Method::Greedy, Method::Update};
  opts.record_timing = false;
  const auto a = run_bench(dg, EventRange{1, 40}, opts);
  const auto b = run_bench(dg, EventRange{1, 40}, opts);
  for (const auto& r : a[0].records) CHECK(r.seconds == 0.0);
  CHECK(emit_report(a, ReportFormat::Csv) == emit_report(b, ReportFormat::Csv));
}

TEST_CASE("aggregates") {
  const std::vector<EventRecord> recs{record(1, 3, 4, 0.5), record(2, 4, 4, 1.5)};
  const Aggregates a = aggregate(recs);
  CHECK(a.defined);
  CHECK(a.ratio_mean == doctest::Approx(0.875));
  CHECK(a.ratio_std == doctest::Approx(0.125));
  CHECK(a.mean_seconds == doctest::Approx(1.0));
  CHECK_FALSE(aggregate({}).defined);
}

TEST_CASE("CSV report") {
  const std::vector<MethodResult> one{result("greedy", {record(7, 3, 4, 0.25)})};
  const std::string csv = emit_report(one, ReportFormat::Csv);
  CHECK(csv == "method,t,size,oracle,ratio,seconds\ngreedy,7,3,4,0.75,0.25\n");
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
}

TEST_CASE("JSON report round trip") {
  std::vector<MethodResult> rs{result("bcas", {record(1, 2, 3, 1e-4), record(2, 3, 3, 2e-4)}),
                               result("exact", {record(1, 3, 3, 0.1)})};
  rs[0].records[1].touched_memory_nodes = 17;
  rs[0].records[1].touched_estimate_nodes = 21;
  rs[1].records[0].oracle_optimal = false;
  rs[1].aggregates = aggregate(rs[1].records);
  rs[1].aggregates.peak_rss_bytes = 12345;
  const auto j = nlohmann::json::parse(emit_report(rs, ReportFormat::Json));
  CHECK(results_from_json(j) == rs);
  CHECK_THROWS_AS(method_result_from_json(nlohmann::json{{"method", "x"}}), Error);
}

TEST_CASE("table sorts by mean ratio") {
  const std::vector<MethodResult> rs{result("greedy", {record(1, 9, 10, 0.01)}),
                                     result("bcas", {record(1, 10, 10, 0.001)}),
                                     result("update", {record(1, 8, 10, 0.0)})};
  const std::string table = emit_report(rs, ReportFormat::Table);
  const auto b = table.find("bcas"), g = table.find("greedy"), u = table.find("update");
  CHECK(b < g);
  CHECK(g < u);
  CHECK(table.find("1.00+-0.000") != std::string::npos);
  CHECK(parse_format("table") == ReportFormat::Table);
  CHECK_THROWS_AS(parse_format("xml"), Error);
}

TEST_CASE("baselines never emit dependent sets over a long run") {
  const DynamicGraph dg = er_stream(80, 0.05, 2000, 12);
  BenchOptions opts;
  opts.methods = {Method::Greedy, Method::Update};
  const auto res = run_bench(dg, EventRange{1, 2000}, opts);  // throws on a dependent set
  CHECK(res[0].records.size() == 2000);
  CHECK(res[0].aggregates.ratio_mean >= 0.9);
  CHECK(std::abs(res[1].aggregates.ratio_mean - res[0].aggregates.ratio_mean) <= 0.05);
}
