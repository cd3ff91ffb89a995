#include "omtree/cli.hpp"
#include "omtree/baselines.hpp"
#include "omtree/config.hpp"
#include "omtree/error.hpp"
#include "omtree/metrics.hpp"
#include "omtree/numfmt.hpp"
#include "omtree/orchestrator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace omtree {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string topology, config, out, dests, traffic;
  std::uint64_t seed = 0;
  int episodes = 0, source = 0, workers = 0;
  CLI::Option *o_topology = nullptr, *o_seed = nullptr, *o_episodes = nullptr, *o_config = nullptr,
              *o_out = nullptr, *o_source = nullptr, *o_dests = nullptr, *o_traffic = nullptr,
              *o_workers = nullptr;

  void attach(CLI::App& app, bool training) {
    o_topology = app.add_option("--topology", topology, "10NodeNet|14NodeNet|21NodeNet|file:PATH");
    o_seed = app.add_option("--seed", seed, "Master seed (also generates named topologies)");
    o_config = app.add_option("--config", config, "key = value config file");
    o_out = app.add_option("--out", out, "Output directory or file");
    o_source = app.add_option("--source", source, "Source node");
    o_dests = app.add_option("--dests", dests, "Destinations, e.g. 3,6,9");
    if (training) {
      o_episodes = app.add_option("--episodes", episodes, "Training episodes");
      o_traffic = app.add_option("--traffic", traffic, "static|random-walk");
      o_workers = app.add_option("--workers", workers, "Threads for lower-agent dispatch");
    }
  }

  // Defaults, then the config file, then explicit flags.
  TrainConfig resolve(TrainConfig base = {}) const {
    TrainConfig c = std::move(base);
    if (o_config->count()) c = load_config(config, c);
    if (o_topology->count()) c.topology = topology;
    if (o_seed->count()) c.seed = seed;
    if (o_source->count()) c.request.source = source;
    if (o_dests->count()) c.request.destinations = parse_node_list(dests);
    if (o_out->count()) c.out_dir = out;
    if (o_episodes && o_episodes->count()) c.episodes = episodes;
    if (o_workers && o_workers->count()) c.workers = workers;
    if (o_traffic && o_traffic->count()) apply_config_value(c, "traffic", traffic);
    return c;
  }
};

void print_metrics(std::ostream& out, const TreeMetrics& m) {
  out << "avg_bottleneck_bw " << format_double(m.avg_bottleneck_bw) << '\n'
      << "avg_delay " << format_double(m.avg_delay) << '\n'
      << "avg_loss " << format_double(m.avg_loss) << '\n';
  for (const auto& r : m.routes) {
    out << "route " << r.destination << " :";
    for (NodeId v : r.route) out << ' ' << v;
    out << " | bw " << format_double(r.metrics.bw_bottleneck) << " delay " << format_double(r.metrics.delay_total)
        << " loss " << format_double(r.metrics.loss_total) << '\n';
  }
}

void report_tree(std::ostream& out, const std::string& label, const OverlayTree& tree, const Topology& topo,
                 const TrainConfig& c) {
  out << label << "_cost " << format_double(tree_cost(tree, topo, c.lower.weights, c.lower.norm)) << '\n';
  write_tree(out, tree);
  print_metrics(out, evaluate_tree(tree, topo));
}

int run_train(const Common& opts, std::ostream& out) {
  const TrainConfig c = opts.resolve();
  const TrainResult r = train(c);
  out << "episodes " << r.rows.size() << '\n' << "run_dir " << c.out_dir << '\n';
  if (!r.best_tree) {
    out << "no successful evaluation episode\n";
    return 0;
  }
  out << "best_episode " << r.best_episode << '\n' << "best_tree_cost " << format_double(r.best_cost) << '\n';
  const Topology topo = resolve_topology(c.topology, c.seed);
  const OverlayTree ospf = ospf_tree(topo, c.request);
  out << "ospf_cost " << format_double(tree_cost(ospf, topo, c.lower.weights, c.lower.norm)) << '\n';
  return 0;
}

int run_eval(const Common& opts, std::ostream& out) {
  if (!opts.o_out->count()) throw CLI::RequiredError("--out");
  const fs::path copy = fs::path(opts.out) / "config.copy";
  if (!fs::exists(copy)) throw Error(ErrorCode::Io, "no config.copy under " + opts.out);
  TrainConfig base = load_config(copy.string());
  base.out_dir = opts.out;
  const TrainConfig c = opts.resolve(base);
  const EpisodeRecord rec = evaluate_run(c);
  out << "sequence " << sequence_label(rec.sequence) << '\n';
  if (!rec.tree) {
    out << "greedy episode failed to reach every destination\n";
    return 2;
  }
  report_tree(out, "tree", *rec.tree, resolve_topology(c.topology, c.seed), c);
  return 0;
}

int run_oracle(const Common& opts, std::ostream& out) {
  const TrainConfig c = opts.resolve();
  const Topology topo = resolve_topology(c.topology, c.seed);
  const OracleResult r = brute_force_optimum(topo, c.request, c.lower.weights, c.lower.norm);
  fs::path path = opts.o_out->count() ? fs::path(opts.out) : fs::path("oracle-tree.txt");
  if (fs::is_directory(path)) path /= "oracle-tree.txt";
  save_tree(path.string(), r.tree, r.cost);
  out << "oracle_cost " << format_double(r.cost) << '\n'
      << "sequence " << sequence_label(r.sequence) << '\n'
      << "sequences_examined " << r.sequences_examined << '\n'
      << "paths_examined " << r.paths_examined << '\n'
      << "tree_file " << path.string() << '\n';
  print_metrics(out, evaluate_tree(r.tree, topo));
  return 0;
}

int run_baseline(const Common& opts, const std::string& method, std::ostream& out) {
  const TrainConfig c = opts.resolve();
  const Topology topo = resolve_topology(c.topology, c.seed);
  const OverlayTree tree =
      method == "ospf" ? ospf_tree(topo, c.request) : greedy_tree(topo, c.request, c.lower.weights, c.lower.norm);
  if (opts.o_out->count()) save_tree(opts.out, tree, tree_cost(tree, topo, c.lower.weights, c.lower.norm));
  report_tree(out, method, tree, topo, c);
  return 0;
}

void write_topology_to(const std::string& path, const Topology& topo, std::ostream& out) {
  if (path.empty()) {
    write_topology(out, topo);
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  write_topology(f, topo);
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Overlay multicast tree construction with hierarchical reinforcement learning"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Common train_opts, eval_opts, oracle_opts, base_opts;
  auto* train_cmd = app.add_subcommand("train", "Train the sequencing and routing agents");
  train_opts.attach(*train_cmd, true);
  auto* eval_cmd = app.add_subcommand("eval", "Greedy episode from a run directory's checkpoints");
  eval_opts.attach(*eval_cmd, true);
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive optimum on a small instance");
  oracle_opts.attach(*oracle_cmd, false);
  auto* base_cmd = app.add_subcommand("baseline", "Non-learning reference trees");
  base_opts.attach(*base_cmd, false);
  std::string method = "ospf";
  base_cmd->add_option("--method", method, "ospf|greedy")->check(CLI::IsMember({"ospf", "greedy"}));

  auto* topo_cmd = app.add_subcommand("topo", "Generate, inspect or export topologies");
  topo_cmd->require_subcommand(1);
  std::string topo_name = "10NodeNet", topo_out;
  std::uint64_t topo_seed = 7;
  int gen_nodes = 10, gen_chords = -1;
  auto* gen_cmd = topo_cmd->add_subcommand("generate", "Random ring-plus-chords topology");
  gen_cmd->add_option("--nodes", gen_nodes, "Node count")->check(CLI::Range(3, 1000));
  gen_cmd->add_option("--chords", gen_chords, "Extra links (default nodes/2)");
  gen_cmd->add_option("--seed", topo_seed, "Seed");
  gen_cmd->add_option("--out", topo_out, "Output file (default stdout)");
  auto* inspect_cmd = topo_cmd->add_subcommand("inspect", "Summarize a topology");
  inspect_cmd->add_option("--topology", topo_name, "10NodeNet|14NodeNet|21NodeNet|file:PATH");
  inspect_cmd->add_option("--seed", topo_seed, "Seed");
  auto* export_cmd = topo_cmd->add_subcommand("export", "Write a topology in the text format");
  export_cmd->add_option("--topology", topo_name, "10NodeNet|14NodeNet|21NodeNet|file:PATH");
  export_cmd->add_option("--seed", topo_seed, "Seed");
  export_cmd->add_option("--out", topo_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return run_train(train_opts, out);
    if (*eval_cmd) return run_eval(eval_opts, out);
    if (*oracle_cmd) return run_oracle(oracle_opts, out);
    if (*base_cmd) return run_baseline(base_opts, method, out);
    if (*gen_cmd) {
      const int chords = gen_chords < 0 ? gen_nodes / 2 : gen_chords;
      write_topology_to(topo_out, build_random_topology(gen_nodes, chords, topo_seed), out);
      return 0;
    }
    if (*inspect_cmd) {
      const Topology t = resolve_topology(topo_name, topo_seed);
      int min_deg = t.node_count(), max_deg = 0;
      for (NodeId v = 0; v < t.node_count(); ++v) {
        min_deg = std::min(min_deg, t.degree(v));
        max_deg = std::max(max_deg, t.degree(v));
      }
      out << "nodes " << t.node_count() << '\n'
          << "links " << t.edge_count() << '\n'
          << "degree " << min_deg << ".." << max_deg << '\n'
          << "max_bw_capacity " << format_double(t.max_bw_capacity()) << '\n'
          << "max_delay " << format_double(t.max_delay()) << '\n';
      return 0;
    }
    if (*export_cmd) {
      write_topology_to(topo_out, resolve_topology(topo_name, topo_seed), out);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Parse || e.code() == ErrorCode::InvalidArgument ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace omtree
