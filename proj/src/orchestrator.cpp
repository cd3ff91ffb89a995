#include "omtree/orchestrator.hpp"
#include "omtree/config.hpp"
#include "omtree/cost.hpp"
#include "omtree/error.hpp"
#include "omtree/rng.hpp"
#include "omtree/telemetry.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

namespace omtree {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void TrainConfig::validate() const {
  if (episodes < 1) throw Error(ErrorCode::InvalidArgument, "episodes must be >= 1");
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  if (eval_interval < 1 || checkpoint_interval < 1)
    throw Error(ErrorCode::InvalidArgument, "intervals must be >= 1");
  if (dense_width < 1) throw Error(ErrorCode::InvalidArgument, "dense width must be >= 1");
  if (request.destinations.empty()) throw Error(ErrorCode::InvalidArgument, "no destinations");
  ppo.validate();
  sac.validate();
}

Topology resolve_topology(const std::string& name, std::uint64_t seed) {
  if (name.rfind("file:", 0) == 0) return load_topology(name.substr(5));
  const auto named = parse_named_topology(name);
  if (!named) throw Error(ErrorCode::InvalidArgument, "unknown topology '" + name + "'");
  return build_named_topology(*named, seed);
}

void SacTally::add(const SacStats& s) {
  if (s.skipped) return;
  ++updates;
  critic_loss += 0.5 * (s.critic1_loss + s.critic2_loss);
  policy_loss += s.policy_loss;
}

void SacTally::merge(const SacTally& o) {
  updates += o.updates;
  critic_loss += o.critic_loss;
  policy_loss += o.policy_loss;
}

LowerRun run_lower_episode(SacAgent& agent, const Topology& snapshot, const ActionLayout& layout,
                           const LowerEnvConfig& cfg, const LowerTask& task, bool train) {
  LowerEnv env(snapshot, layout, cfg);
  env.reset(task.candidates, task.destination);
  LowerRun run;
  while (!env.done()) {
    if (!train) {
      env.step(agent.greedy(env.state(), env.mask()));
      continue;
    }
    Transition t;
    t.state = env.state();
    t.mask = env.mask();
    t.action = agent.act(t.state, t.mask);
    LowerStep s = env.step(t.action);
    t.reward = s.reward;
    t.done = s.done;
    t.next_state = std::move(s.next_state);
    t.next_mask = std::move(s.mask);
    agent.observe(std::move(t));
    run.tally.add(agent.maybe_update());
  }
  run.result = env.extract_result();
  return run;
}

std::vector<LowerRun> dispatch_parallel(std::vector<SacAgent>& agents, const Topology& snapshot,
                                        const ActionLayout& layout, const LowerEnvConfig& cfg,
                                        const std::vector<LowerTask>& tasks, bool train, int workers) {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].agent < 0 || tasks[i].agent >= static_cast<int>(agents.size()))
      throw Error(ErrorCode::InvalidTask, "task refers to a missing agent");
    for (std::size_t j = 0; j < i; ++j)
      if (tasks[j].agent == tasks[i].agent) throw Error(ErrorCode::InvalidTask, "agent used twice");
  }
  std::vector<LowerRun> out(tasks.size());
  const int threads = std::min<int>(workers, static_cast<int>(tasks.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      out[i] = run_lower_episode(agents[tasks[i].agent], snapshot, layout, cfg, tasks[i], train);
    return out;
  }
  std::vector<std::exception_ptr> errors(tasks.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < tasks.size(); i += static_cast<std::size_t>(threads)) {
        try {
          out[i] = run_lower_episode(agents[tasks[i].agent], snapshot, layout, cfg, tasks[i], train);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

int EpisodeRecord::lower_steps() const {
  int n = 0;
  for (const auto& r : lower) n += r.steps_used;
  return n;
}

std::string sequence_label(const Sequence& seq) {
  std::string s;
  for (NodeId v : seq.order) {
    if (!s.empty()) s.push_back('-');
    s += std::to_string(v);
  }
  return s;
}

EpisodeRecord run_episode(UpperEnv& env, PpoAgent& ppo, const LowerExecutor& lower, const Topology& cost_topo,
                          const CostWeights& w, const NormalizationSpec& spec, bool train, Trajectory* traj) {
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeRecord rec;
  Trajectory local;
  env.reset();
  while (!env.done()) {
    UpperTransition tr;
    tr.state = env.state();
    tr.mask = env.mask();
    if (train) {
      const auto d = ppo.act(tr.state, tr.mask);
      tr.action = d.action;
      tr.log_prob = d.log_prob;
      tr.value = d.value;
    } else {
      tr.action = ppo.greedy(tr.state, tr.mask);
    }
    UpperStepOutcome o = env.step(tr.action);
    tr.reward = o.reward;
    tr.done = o.done;
    tr.next_state = std::move(o.next_state);
    rec.upper_rewards.push_back(tr.reward);
    local.steps.push_back(std::move(tr));
  }
  rec.sequence = env.sequence();
  const MulticastRequest& req = env.request();
  for (int k = 1; k <= req.destination_count(); ++k) {
    const NodeId dest = rec.sequence.order[k - 1];
    rec.tasks.push_back({req.index_of(dest), candidate_set(req, rec.sequence, k), dest});
  }
  const std::vector<LowerRun> runs = lower(rec.tasks);
  if (runs.size() != rec.tasks.size()) throw Error(ErrorCode::CountMismatch, "lower executor lost tasks");
  std::vector<double> feedback;
  bool all_ok = true;
  for (const auto& r : runs) {
    rec.lower.push_back(r.result);
    rec.tally.merge(r.tally);
    feedback.push_back(r.result.feedback_reward);
    all_ok = all_ok && r.result.success;
  }
  rec.r_seq = sequence_reward(feedback, req.destination_count());
  local.steps.back().reward += rec.r_seq;

  rec.tree_cost = kNaN;
  if (all_ok) {
    std::vector<OverlayChoice> choices;
    for (const auto& r : rec.lower) choices.push_back({r.chosen_source, r.path});
    OverlayTree tree = assemble_tree(req, rec.sequence, choices);
    tree.validate_against(cost_topo);
    rec.tree_cost = tree_cost(tree, cost_topo, w, spec);
    rec.metrics = evaluate_tree(tree, cost_topo);
    rec.tree = std::move(tree);
  }
  if (traj) *traj = std::move(local);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

struct Agents {
  PpoAgent ppo;
  ActionLayout layout;
  std::vector<SacAgent> sac;
};

Agents make_agents(const TrainConfig& cfg, const Topology& topo) {
  const int nd = cfg.request.destination_count();
  Agents a{PpoAgent(nd, cfg.ppo, derive_seed(cfg.seed, "upper")), ActionLayout(topo, cfg.request.overlay_nodes()),
           {}};
  const ApproximatorSpec spec = lower_network_spec(topo.node_count(), a.layout.action_count(), cfg.dense_width);
  for (int i = 0; i < nd; ++i) a.sac.emplace_back(spec, cfg.sac, derive_seed(cfg.seed, "lower", static_cast<std::uint64_t>(i)));
  return a;
}

std::string ckpt_dir(const TrainConfig& cfg) { return (fs::path(cfg.out_dir) / "checkpoints").string(); }

std::string sac_ckpt(const TrainConfig& cfg, int i) {
  return (fs::path(ckpt_dir(cfg)) / ("agent-sac-" + std::to_string(i) + ".ckpt")).string();
}

std::string ppo_ckpt(const TrainConfig& cfg) { return (fs::path(ckpt_dir(cfg)) / "agent-ppo.ckpt").string(); }

void save_agents(const TrainConfig& cfg, const Agents& a) {
  a.ppo.save(ppo_ckpt(cfg));
  for (std::size_t i = 0; i < a.sac.size(); ++i) a.sac[i].save(sac_ckpt(cfg, static_cast<int>(i)));
}

MetricsRow make_row(const EpisodeRecord& rec, const PpoStats& ps, const std::vector<SacAgent>& sac) {
  MetricsRow r;
  r.episode = rec.episode;
  r.sequence = sequence_label(rec.sequence);
  r.r_seq = rec.r_seq;
  r.success = rec.success();
  for (const auto& l : rec.lower) r.success_flags.push_back(l.success ? '1' : '0');
  r.lower_steps = rec.lower_steps();
  r.tree_cost = rec.tree_cost;
  r.avg_bw = rec.metrics ? rec.metrics->avg_bottleneck_bw : kNaN;
  r.avg_delay = rec.metrics ? rec.metrics->avg_delay : kNaN;
  r.avg_loss = rec.metrics ? rec.metrics->avg_loss : kNaN;
  r.eval_cost = kNaN;
  r.ppo_policy_loss = ps.policy_loss;
  r.ppo_value_loss = ps.value_loss;
  r.ppo_entropy = ps.entropy;
  r.ppo_mean_ratio = ps.mean_ratio;
  r.sac_updates = rec.tally.updates;
  r.sac_critic_loss = rec.tally.updates ? rec.tally.critic_loss / rec.tally.updates : kNaN;
  r.sac_policy_loss = rec.tally.updates ? rec.tally.policy_loss / rec.tally.updates : kNaN;
  double alpha = 0.0;
  for (const auto& s : sac) alpha += s.alpha();
  r.sac_alpha = alpha / static_cast<double>(sac.size());
  return r;
}

std::optional<double> oracle_cost_in(const std::string& dir) {
  const fs::path p = fs::path(dir) / "oracle-tree.txt";
  if (!fs::exists(p)) return std::nullopt;
  return load_tree(p.string()).cost;
}

void write_timing(const std::string& path, const std::vector<double>& secs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "episode,wall_seconds\n";
  for (std::size_t i = 0; i < secs.size(); ++i) out << i << ',' << secs[i] << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const EpisodeObserver& observer) {
  cfg.validate();
  Topology truth = resolve_topology(cfg.topology, cfg.seed);
  cfg.request.validate(truth.node_count());
  cfg.lower.validate(truth.node_count());

  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir / "checkpoints", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + (dir / "checkpoints").string() + ": " + ec.message());
  fs::remove(dir / "PARTIAL", ec);

  TrainResult res;
  std::vector<double> timing;
  const std::string metrics_path = (dir / "metrics.csv").string();
  auto summary = [&]() -> std::optional<MetricsSummary> {
    if (res.best_episode < 0) return std::nullopt;
    return MetricsSummary{res.best_episode, res.best_cost, oracle_cost_in(cfg.out_dir)};
  };

  try {
    save_config((dir / "config.copy").string(), cfg);
    Agents agents = make_agents(cfg, truth);
    Topology snapshot = measure_snapshot(truth, derive_seed(cfg.seed, "telemetry", 0));
    for (int ep = 0; ep < cfg.episodes; ++ep) {
      if (cfg.traffic == TrafficMode::RandomWalk && ep > 0) {
        truth = advance_traffic(truth, cfg.traffic, derive_seed(cfg.seed, "traffic", static_cast<std::uint64_t>(ep)));
        snapshot = measure_snapshot(truth, derive_seed(cfg.seed, "telemetry", static_cast<std::uint64_t>(ep)));
      }
      UpperEnv env(snapshot, cfg.request);
      auto executor = [&](bool learn) -> LowerExecutor {
        return [&, learn](const std::vector<LowerTask>& tasks) {
          return dispatch_parallel(agents.sac, snapshot, agents.layout, cfg.lower, tasks, learn, cfg.workers);
        };
      };
      Trajectory traj;
      EpisodeRecord rec =
          run_episode(env, agents.ppo, executor(true), truth, cfg.lower.weights, cfg.lower.norm, true, &traj);
      rec.episode = ep;
      const PpoStats ps = agents.ppo.update(traj);
      if (observer) observer(rec, snapshot);
      MetricsRow row = make_row(rec, ps, agents.sac);
      double secs = rec.wall_seconds;

      if ((ep + 1) % cfg.eval_interval == 0 || ep + 1 == cfg.episodes) {
        EpisodeRecord ev =
            run_episode(env, agents.ppo, executor(false), truth, cfg.lower.weights, cfg.lower.norm, false);
        secs += ev.wall_seconds;
        row.eval_cost = ev.tree_cost;
        if (ev.tree && (res.best_episode < 0 || ev.tree_cost < res.best_cost)) {
          res.best_episode = ep;
          res.best_cost = ev.tree_cost;
          res.best_tree = ev.tree;
        }
      }
      res.rows.push_back(std::move(row));
      timing.push_back(secs);

      if ((ep + 1) % cfg.checkpoint_interval == 0 || ep + 1 == cfg.episodes) {
        save_agents(cfg, agents);
        emit_metrics(metrics_path, res.rows, summary());
        write_timing((dir / "timing.csv").string(), timing);
        if (res.best_tree) save_tree((dir / "best-tree.txt").string(), *res.best_tree, res.best_cost);
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) {
      std::ofstream marker(dir / "PARTIAL");
      marker << "stopped after " << res.rows.size() << " episodes: " << e.what() << '\n';
    }
    throw;
  }
  return res;
}

EpisodeRecord evaluate_run(const TrainConfig& cfg) {
  cfg.validate();
  const Topology truth = resolve_topology(cfg.topology, cfg.seed);
  cfg.request.validate(truth.node_count());
  if (!fs::exists(ppo_ckpt(cfg)))
    throw Error(ErrorCode::Io, "no checkpoints under " + ckpt_dir(cfg));
  Agents agents = make_agents(cfg, truth);
  agents.ppo.load(ppo_ckpt(cfg));
  for (std::size_t i = 0; i < agents.sac.size(); ++i) agents.sac[i].load(sac_ckpt(cfg, static_cast<int>(i)));
  const Topology snapshot = measure_snapshot(truth, derive_seed(cfg.seed, "telemetry", 0));
  UpperEnv env(snapshot, cfg.request);
  LowerExecutor exec = [&](const std::vector<LowerTask>& tasks) {
    return dispatch_parallel(agents.sac, snapshot, agents.layout, cfg.lower, tasks, false, cfg.workers);
  };
  return run_episode(env, agents.ppo, exec, truth, cfg.lower.weights, cfg.lower.norm, false);
}

}  // namespace omtree
