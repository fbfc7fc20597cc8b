// dynmis: generate dynamic graphs, run solvers, train the event-driven
// model and benchmark methods against the exact oracle.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynmis/bench.hpp"
#include "dynmis/checkpoint.hpp"
#include "dynmis/genesis.hpp"
#include "dynmis/graph_io.hpp"
#include "dynmis/report.hpp"
#include "dynmis/solvers.hpp"
#include "dynmis/trainer.hpp"

using namespace dynmis;
using nlohmann::json;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "no seeds given");
  return seeds;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

struct TrainArgs {
  std::string graph;
  std::string variant = "bcas";
  double gamma = 0.25;
  double c = 3.0;
  std::string seeds = "1,2,3";
  std::size_t epochs = 10;
  std::size_t pretrain_epochs = 1000;
  std::size_t window = 10;
  double rel_tol = 1e-3;
  double lr = 1e-4;
  double pretrain_lr = 1e-2;
  std::string split = "70:15:15";
  std::string ckpt;
  std::string out;
  std::string log;

  void add_common(CLI::App* app) {
    app->add_option("--graph", graph, "Dynamic graph file")->required()->check(CLI::ExistingFile);
    app->add_option("--variant", variant, "bcas | nocas");
    app->add_option("--gamma", gamma, "BCAS radius fraction of diam(G_0)");
    app->add_option("--c", c, "Independence penalty weight");
    app->add_option("--seeds", seeds, "Comma-separated pre-training seeds");
    app->add_option("--pretrain-epochs", pretrain_epochs, "Pre-training epoch cap");
    app->add_option("--pretrain-lr", pretrain_lr, "Pre-training learning rate");
    app->add_option("--window", window, "Stabilization window (epochs)");
    app->add_option("--rel-tol", rel_tol, "Stabilization relative tolerance");
    app->add_option("--out", out, "Checkpoint output path")->required();
    app->add_option("--log", log, "Training log (JSON)");
  }

  TrainRunSpec spec(const DynamicGraph& dg, std::size_t epoch_cap, double rate) const {
    TrainRunSpec s;
    neural::AdamConfig adam;
    adam.lr = rate;
    s.cfg = make_config(parse_variant(variant), diameter(dg.initial), gamma, c, {}, adam);
    s.epochs_max = epoch_cap;
    s.stabilization = {window, rel_tol};
    s.seeds = parse_seeds(seeds);
    return s;
  }
};

json logs_json(const std::vector<TrainLog>& logs) {
  json arr = json::array();
  for (const auto& l : logs) arr.push_back(to_json(l));
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum independent sets over dynamic graphs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dynamic graph");
  std::string topology = "er";
  std::string preset;
  GenSpec gspec;
  double p = 0.05;
  PowerLaw pl;
  std::string gen_out;
  gen->add_option("--topology", topology, "er | pl")->check(CLI::IsMember({"er", "pl"}));
  gen->add_option("--preset", preset, "small | medium | large (sets --n and --events)");
  gen->add_option("--n", gspec.n, "Node count");
  gen->add_option("--p", p, "ER edge probability");
  gen->add_option("--exponent", pl.exponent, "Power-law exponent");
  gen->add_option("--min-degree", pl.min_degree, "Power-law minimum degree");
  gen->add_option("--max-degree", pl.max_degree, "Power-law degree cap (0: n-1)");
  gen->add_option("--events", gspec.events, "Number of edge events T");
  gen->add_option("--add-frac", gspec.add_fraction, "Probability an event is an addition");
  gen->add_option("--seed", gspec.seed, "Random seed");
  gen->add_option("--out", gen_out, "Output file")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Check an event stream for precondition violations");
  std::string val_graph;
  val->add_option("--graph", val_graph)->required()->check(CLI::ExistingFile);

  // solve
  auto* solve = app.add_subcommand("solve", "Run a classical solver on one snapshot");
  std::string solve_method = "exact";
  std::string solve_input;
  double time_limit = 1.0;
  long long solve_at = -1;
  std::string solve_report;
  solve->add_option("--method", solve_method, "exact | greedy | update")
      ->check(CLI::IsMember({"exact", "greedy", "update"}));
  solve->add_option("--input", solve_input, "Dynamic graph file")->required()->check(CLI::ExistingFile);
  solve->add_option("--time-limit", time_limit, "Exact solver limit in seconds (<= 0: none)");
  solve->add_option("--at", solve_at, "Snapshot index t (default: final)");
  solve->add_option("--report", solve_report, "JSON report path (default stdout)");

  // pretrain / train
  auto* pre = app.add_subcommand("pretrain", "Pre-train on the construction of G_0");
  TrainArgs pre_args;
  pre_args.add_common(pre);

  auto* tr = app.add_subcommand("train", "Train on the training split (pre-trains first unless --ckpt)");
  TrainArgs tr_args;
  tr_args.add_common(tr);
  tr->add_option("--epochs", tr_args.epochs, "Training epoch cap");
  tr->add_option("--lr", tr_args.lr, "Training learning rate");
  tr->add_option("--split", tr_args.split, "train:val:test ratios");
  tr->add_option("--ckpt", tr_args.ckpt, "Pre-trained checkpoint to start from");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark methods on one split");
  std::string bench_graph, which = "test", ratios = "70:15:15", methods = "bcas,nocas,greedy,update,exact";
  std::string ckpt_all, ckpt_bcas, ckpt_nocas, format = "table", bench_out;
  double oracle_limit = 1.0;
  bool no_timing = false;
  bench->add_option("--graph", bench_graph)->required()->check(CLI::ExistingFile);
  bench->add_option("--split", which, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
  bench->add_option("--ratios", ratios, "train:val:test ratios");
  bench->add_option("--methods", methods, "Comma-separated methods");
  bench->add_option("--ckpt", ckpt_all, "Checkpoint for learned methods");
  bench->add_option("--ckpt-bcas", ckpt_bcas, "Checkpoint for bcas (overrides --ckpt)");
  bench->add_option("--ckpt-nocas", ckpt_nocas, "Checkpoint for nocas (overrides --ckpt)");
  bench->add_option("--oracle-limit", oracle_limit, "Oracle time limit in seconds");
  bench->add_option("--format", format, "table | csv | json")->check(CLI::IsMember({"table", "csv", "json"}));
  bench->add_option("--out", bench_out, "Report path (default stdout)");
  bench->add_flag("--no-timing", no_timing, "Record zero seconds (reproducible reports)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (!preset.empty()) {
        const auto sp = size_preset(preset);
        if (gen->count("--n") == 0) gspec.n = sp.n;
        if (gen->count("--events") == 0) gspec.events = sp.events;
      }
      if (topology == "er") {
        gspec.topology = ErdosRenyi{p};
      } else {
        gspec.topology = pl;
      }
      const DynamicGraph dg = generate(gspec);
      save_dynamic_graph(gen_out, dg);
      std::cerr << "wrote " << gen_out << ": n=" << dg.node_count() << " initial_edges=" << dg.initial.edge_count()
                << " events=" << dg.horizon() << '\n';
    } else if (*val) {
      const DynamicGraph dg = load_dynamic_graph(val_graph);
      const auto violations = validate(dg);
      for (const auto& v : violations)
        std::cout << "t=" << v.time << ' ' << to_string(v.code) << " (" << v.u << ',' << v.v << ")\n";
      if (violations.empty()) std::cout << "ok\n";
      return violations.empty() ? 0 : 1;
    } else if (*solve) {
      const DynamicGraph dg = load_dynamic_graph(solve_input);
      const std::size_t t = solve_at < 0 ? dg.horizon() : static_cast<std::size_t>(solve_at);
      json report{{"method", solve_method}, {"t", t}};
      const auto start = std::chrono::steady_clock::now();
      IndependentSet set;
      if (solve_method == "update") {
        UpdateState st(dg.initial);
        for (std::size_t i = 0; i < t && i < dg.horizon(); ++i) st.step(dg.events[i]);
        set = st.members();
        report["note"] = "rule-based substitute update algorithm (min-degree greedy seed, degree-based eviction)";
      } else {
        const Snapshot s = snapshot_at(dg, t);
        if (solve_method == "greedy") {
          set = greedy_maxis(s);
        } else {
          const auto res = exact_maxis(s, time_limit <= 0 ? kNoTimeLimit : time_limit);
          set = res.set;
          report["proven_optimal"] = res.proven_optimal;
          report["branch_nodes"] = res.branch_nodes;
        }
      }
      report["elapsed"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report["size"] = set.size();
      report["members"] = set;
      write_text(solve_report, report.dump(2) + "\n");
    } else if (*pre) {
      const DynamicGraph dg = load_dynamic_graph(pre_args.graph);
      const TrainRunSpec spec = pre_args.spec(dg, pre_args.pretrain_epochs, pre_args.pretrain_lr);
      std::vector<TrainLog> logs;
      const Checkpoint ck = pretrain(dg.initial, spec, &logs);
      save_checkpoint(pre_args.out, ck, {{"phase", "pretrain"}, {"graph", pre_args.graph}, {"logs", logs_json(logs)}});
      if (!pre_args.log.empty()) write_text(pre_args.log, logs_json(logs).dump(2) + "\n");
      std::cerr << "pre-training: best seed " << ck.provenance.seed << " epoch " << ck.provenance.epoch << " loss "
                << ck.provenance.loss << '\n';
    } else if (*tr) {
      const DynamicGraph dg = load_dynamic_graph(tr_args.graph);
      std::vector<TrainLog> logs;
      Checkpoint start;
      if (!tr_args.ckpt.empty()) {
        start = load_checkpoint(tr_args.ckpt);
      } else {
        start = pretrain(dg.initial, tr_args.spec(dg, tr_args.pretrain_epochs, tr_args.pretrain_lr), &logs);
      }
      TrainRunSpec spec = tr_args.spec(dg, tr_args.epochs, tr_args.lr);
      spec.cfg.dims = start.cfg.dims;
      const Splits splits = split(dg.horizon(), parse_split(tr_args.split));
      TrainLog log;
      const Checkpoint ck = train(start, dg, splits.train, spec, &log);
      logs.push_back(log);
      save_checkpoint(tr_args.out, ck,
                      {{"phase", "train"}, {"graph", tr_args.graph}, {"split", tr_args.split}, {"logs", logs_json(logs)}});
      if (!tr_args.log.empty()) write_text(tr_args.log, logs_json(logs).dump(2) + "\n");
      std::cerr << "training: best epoch " << ck.provenance.epoch << " loss " << ck.provenance.loss << '\n';
    } else if (*bench) {
      const DynamicGraph dg = load_dynamic_graph(bench_graph);
      const Splits splits = split(dg.horizon(), parse_split(ratios));
      const EventRange range = which == "train" ? splits.train : which == "val" ? splits.val : splits.test;
      BenchOptions opts;
      opts.methods = parse_methods(methods);
      opts.oracle_time_limit = oracle_limit;
      opts.record_timing = !no_timing;
      std::vector<Checkpoint> owned;
      owned.reserve(3);
      const auto attach = [&](Method m, const std::string& specific) {
        const std::string& path = specific.empty() ? ckpt_all : specific;
        if (path.empty()) return;
        owned.push_back(load_checkpoint(path));
        opts.checkpoints[m] = &owned.back();
      };
      attach(Method::Bcas, ckpt_bcas);
      attach(Method::NoCas, ckpt_nocas);
      const auto results = run_bench(dg, range, opts);
      write_text(bench_out, emit_report(results, parse_format(format)));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
