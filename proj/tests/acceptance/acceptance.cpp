// Acceptance runner: `omtree_acceptance 1 2 ...` prints one line per criterion
// and exits nonzero when any of them fails.
#include "omtree/baselines.hpp"
#include "omtree/cost.hpp"
#include "omtree/env_lower.hpp"
#include "omtree/env_upper.hpp"
#include "omtree/error.hpp"
#include "omtree/metrics.hpp"
#include "omtree/numfmt.hpp"
#include "omtree/orchestrator.hpp"
#include "omtree/policy.hpp"
#include "omtree/ppo.hpp"
#include "omtree/rng.hpp"
#include "omtree/sac.hpp"
#include "omtree/telemetry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace omtree;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      failures.push_back(what);
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) { return format_double(x); }

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::current_path() / ("acceptance-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- 1: cost math --------------------------------------------------------

void cost_math(Verdict& v) {
  const CostWeights w;
  const NormalizationSpec spec;
  Rng rng(derive_seed(1, "duality"));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const NormalizedTriple x{rng.uniform(), rng.uniform(), rng.uniform()};
    worst = std::max(worst, std::abs(edge_cost(x, w) + link_reward(x, w)));
    v.require(link_reward(x, w) <= 0.0, "positive link reward");
  }
  v.require(worst <= 1e-12, "duality residual " + fmt(worst));

  const Topology line(3, {Edge::make(0, 1), Edge::make(1, 2)}, {{40, 30, 2, 0.1}, {40, 12, 3, 0.1}});
  const PathMetrics m = path_metrics(line, {0, 1, 2});
  v.require(m.loss_total == 1.0 - 0.9 * 0.9, "loss composition " + fmt(m.loss_total));
  v.require(m.bw_bottleneck == 12.0, "bottleneck");
  v.require(m.delay_total == 5.0, "delay sum");
  const NormalizedTriple n = normalize_metrics(m, spec);
  v.require(n.bw == 12.0 / 40.0 && n.delay == 5.0 / 10.0 && n.loss == m.loss_total, "normalization");
  const double f = (1.0 - 0.3) / 3.0 + 0.5 / 3.0 + m.loss_total / 3.0;
  v.require(std::abs(path_cost(line, {0, 1, 2}, w, spec) - f) <= 1e-15, "edge cost");
  const NormalizedTriple big = normalize_metrics(PathMetrics{80, 25, 0.2}, spec);
  v.require(big.bw == 1.0 && big.delay == 1.0, "normalization clamp");
  v.detail << "max |f + R_link| = " << fmt(worst) << ", loss(0.1,0.1) = " << fmt(m.loss_total);
}

// ---- 2: telemetry round trip ---------------------------------------------

void telemetry_round_trip(Verdict& v) {
  Rng rng(derive_seed(2, "links"));
  const TelemetryOptions opts;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LinkState truth;
    truth.bw_max = rng.uniform(5.0, 40.0);
    truth.bw_residual = truth.bw_max * rng.uniform(0.05, 1.0);
    truth.delay = rng.uniform(1.0, 10.0);
    truth.loss = rng.uniform(0.0005, 0.05);
    const LinkTelemetry t = synthesize_telemetry(truth, rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), opts, rng);
    const LinkState got = derive_link_state(t, truth.bw_max);
    worst = std::max({worst, std::abs(got.bw_residual - truth.bw_residual) / truth.bw_residual,
                      std::abs(got.delay - truth.delay) / truth.delay,
                      std::abs(got.loss - truth.loss) / truth.loss});
  }
  v.require(worst <= 1e-6, "relative error " + fmt(worst));
  v.detail << "max relative error " << fmt(worst) << " over 1000 links";
}

// ---- 3: gradient checks --------------------------------------------------

double probe_gradients(const ParameterSet& params, const Eigen::MatrixXd& x, const OutputLoss& loss, Rng& rng) {
  const LossAndGradient g = gradient(params, x, loss);
  double worst = 0.0;
  int probes = 0;
  while (probes < 10) {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(params.values.size())));
    const double h = 1e-5;
    ParameterSet p = params, m = params;
    p.values[i] += h;
    m.values[i] -= h;
    Eigen::MatrixXd scratch;
    const double fd = (loss(forward(p, x), scratch) - loss(forward(m, x), scratch)) / (2 * h);
    const double a = g.gradient[i];
    const double scale = std::max(std::abs(a), std::abs(fd));
    // Parameters with no influence on this batch (dead units) carry no signal.
    if (scale < 1e-8) continue;
    worst = std::max(worst, std::abs(a - fd) / scale);
    ++probes;
  }
  return worst;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo, double hi) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

void gradient_checks(Verdict& v) {
  Rng rng(derive_seed(3, "probes"));
  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  const MulticastRequest req{0, {3, 6, 9}};

  // Upper states from a partially played episode.
  UpperEnv uenv(topo, req);
  uenv.reset();
  std::vector<Tensor3> ustates{uenv.state()};
  std::vector<ActionMask> umasks{uenv.mask()};
  uenv.step(1);
  ustates.push_back(uenv.state());
  umasks.push_back(uenv.mask());
  std::vector<const Tensor3*> uptr;
  for (const auto& s : ustates) uptr.push_back(&s);
  const Eigen::MatrixXd ux = stack_states(uptr);

  PpoAgent ppo(3, PpoConfig{}, 5);
  PolicyBatch ub{ux, {2, 0}, umasks};
  Eigen::VectorXd old_lp = log_probs_of(ppo.actor(), ub);
  old_lp.array() += 0.05;
  const Eigen::VectorXd adv = random_matrix(2, 1, rng, -1, 1);
  const double actor_err = probe_gradients(ppo.actor(), ux, [&](const Eigen::MatrixXd& y, Eigen::MatrixXd& d) {
    return surrogate_loss(y, ub, old_lp, adv, 0.2, &d);
  }, rng);
  const Eigen::VectorXd vt = random_matrix(2, 1, rng, -2, 2);
  const double critic_err = probe_gradients(ppo.critic(), ux, [&](const Eigen::MatrixXd& y, Eigen::MatrixXd& d) {
    return value_loss(y, vt, &d);
  }, rng);

  // Lower states from a short random walk.
  const ActionLayout lay(topo, req.overlay_nodes());
  LowerEnv lenv(topo, lay, {});
  lenv.reset({0, 3}, 6);
  std::vector<Tensor3> lstates;
  std::vector<ActionMask> lmasks;
  std::vector<int> lacts;
  while (lstates.size() < 4) {
    if (lenv.done()) lenv.reset({0, 3}, 6);
    lstates.push_back(lenv.state());
    lmasks.push_back(lenv.mask());
    std::vector<int> legal;
    for (int a = 0; a < lay.action_count(); ++a)
      if (lenv.mask()[a]) legal.push_back(a);
    lacts.push_back(legal[rng.below(legal.size())]);
    lenv.step(lacts.back());
  }
  std::vector<const Tensor3*> lptr;
  for (const auto& s : lstates) lptr.push_back(&s);
  const Eigen::MatrixXd lx = stack_states(lptr);
  SacAgent sac(lower_network_spec(10, lay.action_count()), SacConfig{}, 9);
  const Eigen::MatrixXd q1 = random_matrix(lay.action_count(), 4, rng, -3, 3);
  const Eigen::MatrixXd q2 = random_matrix(lay.action_count(), 4, rng, -3, 3);
  const double sac_actor_err = probe_gradients(sac.actor(), lx, [&](const Eigen::MatrixXd& y, Eigen::MatrixXd& d) {
    return policy_loss(y, q1, q2, lmasks, 0.2, &d);
  }, rng);
  const Eigen::VectorXd y = random_matrix(4, 1, rng, -5, 5);
  std::vector<double> errs{actor_err, critic_err, sac_actor_err};
  for (int c = 0; c < 2; ++c)
    errs.push_back(probe_gradients(sac.critic(c), lx, [&](const Eigen::MatrixXd& q, Eigen::MatrixXd& d) {
      return critic_loss(q, lacts, y, &d);
    }, rng));
  const char* names[] = {"ppo-actor", "ppo-critic", "sac-actor", "sac-critic1", "sac-critic2"};
  for (int i = 0; i < 5; ++i) {
    v.require(errs[i] <= 1e-4, std::string(names[i]) + " relative error " + fmt(errs[i]));
    v.detail << (i ? ", " : "") << names[i] << " " << fmt(errs[i]);
  }
}

// ---- 4: RL math ----------------------------------------------------------

void rl_math(Verdict& v) {
  Rng rng(derive_seed(4, "gae"));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(5);
    for (double& x : r) x = rng.uniform(-3, 3);
    const double g = rng.uniform(0.5, 1.0);
    const Eigen::VectorXd a = gae(r, std::vector<double>(5, 0.0), {false, false, false, false, true}, 0.0, g, 1.0);
    for (int t = 0; t < 5; ++t) {
      double ret = 0.0;
      for (int u = 4; u >= t; --u) ret = r[u] + g * ret;
      worst = std::max(worst, std::abs(a[t] - ret));
    }
  }
  v.require(worst <= 1e-10, "gae error " + fmt(worst));

  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  UpperEnv env(topo, MulticastRequest{0, {3, 6, 9}});
  env.reset();
  PpoAgent ppo(3, PpoConfig{}, 1);
  PolicyBatch batch{stack_states({&env.state()}), {1}, {env.mask()}};
  const Eigen::VectorXd lp = log_probs_of(ppo.actor(), batch);
  double ratio = 0.0;
  surrogate_loss(forward(ppo.actor(), batch.states), batch, lp, Eigen::VectorXd::Ones(1), 0.2, nullptr, &ratio);
  v.require(ratio == 1.0, "ratio at identical parameters " + fmt(ratio));

  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 1), q1(2, 1), q2(2, 1);
  q1 << 1, 2;
  q2 << 2, 1;
  const double y0 = soft_target_values(logits, q1, q2, {0.0}, {false}, {{true, true}}, 0.0, 1.0)[0];
  const double y1 = soft_target_values(logits, q1, q2, {0.0}, {false}, {{true, true}}, 1.0, 1.0)[0];
  v.require(y0 == 1.0, "alpha=0 target " + fmt(y0));
  v.require(std::abs(y1 - (1.0 + std::log(2.0))) <= 1e-10, "alpha=1 target " + fmt(y1));

  Eigen::VectorXd tgt = Eigen::VectorXd::Zero(1);
  polyak_update(tgt, Eigen::VectorXd::Ones(1), 0.005);
  v.require(tgt[0] == 0.005, "polyak " + fmt(tgt[0]));

  AdamState opt = AdamState::for_params(1, SacConfig{}.alpha_lr);
  Eigen::VectorXd la = Eigen::VectorXd::Constant(1, std::log(SacConfig{}.initial_alpha));
  const double a0 = std::exp(la[0]);
  bool monotone = true;
  for (int i = 0; i < 100; ++i) {
    const double before = std::exp(la[0]);
    double d = 0.0;
    temperature_loss(la[0], {0.0}, {std::log(2.0)}, &d);
    apply_update(opt, la, Eigen::VectorXd::Constant(1, d));
    monotone = monotone && std::exp(la[0]) > before;
  }
  v.require(monotone, "alpha not monotone under H < H_target");
  v.detail << "gae err " << fmt(worst) << ", ratio " << fmt(ratio) << ", y = " << fmt(y0) << " / " << fmt(y1)
           << ", alpha " << fmt(a0) << " -> " << fmt(std::exp(la[0]));
}

// ---- 5: mask safety ------------------------------------------------------

bool legal_lower_move(const Topology& topo, const ActionLayout& lay, const LowerEnv& env, int a) {
  const ActionSlot* s = lay.slot(env.position(), a);
  if (!s) return false;
  if (s->kind == SlotKind::Switch) {
    if (env.moved() || s->node == env.position() || s->node == env.destination()) return false;
    const auto& c = env.candidates();
    return std::find(c.begin(), c.end(), s->node) != c.end();
  }
  if (!topo.has_edge(env.position(), s->node)) return false;
  const Path& p = env.path();
  return std::find(p.begin(), p.end(), s->node) == p.end();
}

void mask_safety(Verdict& v) {
  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  const MulticastRequest req{0, {3, 6, 9}};
  double worst_sum = 0.0;

  PpoAgent ppo(3, PpoConfig{}, derive_seed(5, "upper"));
  UpperEnv uenv(topo, req);
  int upper_actions = 0, repeats = 0;
  while (upper_actions < 10000) {
    uenv.reset();
    std::vector<char> taken(3, 0);
    while (!uenv.done() && upper_actions < 10000) {
      const MaskedDistribution d = masked_softmax(ppo.logits(uenv.state()), uenv.mask());
      worst_sum = std::max(worst_sum, std::abs(d.probs.sum() - 1.0));
      const int a = ppo.act(uenv.state(), uenv.mask()).action;
      if (taken[a]) ++repeats;
      taken[a] = 1;
      uenv.step(a);
      ++upper_actions;
    }
  }
  v.require(repeats == 0, std::to_string(repeats) + " repeated destinations");

  const ActionLayout lay(topo, req.overlay_nodes());
  SacAgent sac(lower_network_spec(10, lay.action_count()), SacConfig{}, derive_seed(5, "lower"));
  LowerEnv lenv(topo, lay, {});
  Rng rng(derive_seed(5, "tasks"));
  const std::vector<LowerTask> tasks{{0, {0}, 3}, {1, {0, 3}, 6}, {2, {0, 3, 6}, 9}, {2, {0, 6}, 9}};
  int lower_actions = 0, illegal = 0;
  while (lower_actions < 10000) {
    const LowerTask& t = tasks[rng.below(tasks.size())];
    lenv.reset(t.candidates, t.destination);
    while (!lenv.done() && lower_actions < 10000) {
      const MaskedDistribution d = sac.policy(lenv.state(), lenv.mask());
      worst_sum = std::max(worst_sum, std::abs(d.probs.sum() - 1.0));
      const int a = sac.act(lenv.state(), lenv.mask());
      if (!legal_lower_move(topo, lay, lenv, a)) ++illegal;
      lenv.step(a);
      ++lower_actions;
    }
  }
  v.require(illegal == 0, std::to_string(illegal) + " illegal lower actions");
  v.require(worst_sum <= 1e-6, "probability mass off by " + fmt(worst_sum));
  v.detail << upper_actions << " upper / " << lower_actions << " lower actions, max |sum p - 1| = "
           << fmt(worst_sum);
}

// ---- 6 and 8: end-to-end run ---------------------------------------------

struct RewardAudit {
  long episodes = 0, lower_runs = 0;
  double worst = 0.0;
  long mismatched = 0;

  void check(const EpisodeRecord& rec, const Topology& snapshot, const TrainConfig& cfg) {
    ++episodes;
    double sum_fb = 0.0;
    for (const auto& l : rec.lower) {
      ++lower_runs;
      const double expect = l.success ? path_link_reward(snapshot, l.path, cfg.lower.weights, cfg.lower.norm)
                                      : cfg.lower.r_terminal_fail;
      note(l.feedback_reward, expect);
      sum_fb += expect;
    }
    note(rec.r_seq, sum_fb);
    if (rec.tree) {
      // Same identity from the assembled tree alone.
      double from_tree = 0.0;
      for (const auto& c : rec.tree->entries())
        from_tree += path_link_reward(snapshot, c.path, cfg.lower.weights, cfg.lower.norm);
      note(rec.r_seq, from_tree);
    }
  }

  void note(double got, double expect) {
    const double e = std::abs(got - expect);
    worst = std::max(worst, e);
    if (!(e <= 1e-10)) ++mismatched;
  }
};

void end_to_end(const std::vector<int>& which, std::map<int, Verdict>& out) {
  TrainConfig cfg;  // 10NodeNet, seed 7, static traffic, source 0, dests 3,6,9, 3000 episodes
  cfg.out_dir = work_dir("criterion-8").string();
  RewardAudit audit;
  const auto t0 = Clock::now();
  const TrainResult res = train(cfg, [&](const EpisodeRecord& rec, const Topology& snap) { audit.check(rec, snap, cfg); });
  const double secs = seconds_since(t0);

  if (std::count(which.begin(), which.end(), 6)) {
    Verdict& v = out[6];
    v.require(audit.episodes == cfg.episodes, "observer saw " + std::to_string(audit.episodes) + " episodes");
    v.require(audit.mismatched == 0, std::to_string(audit.mismatched) + " reward identities off");
    v.detail << audit.episodes << " episodes, " << audit.lower_runs << " lower runs, max residual "
             << fmt(audit.worst);
  }
  if (std::count(which.begin(), which.end(), 8)) {
    Verdict& v = out[8];
    const Topology truth = resolve_topology(cfg.topology, cfg.seed);
    const double ospf = tree_cost(ospf_tree(truth, cfg.request), truth, cfg.lower.weights, cfg.lower.norm);
    const OracleResult oracle = brute_force_optimum(truth, cfg.request, cfg.lower.weights, cfg.lower.norm);
    save_tree((fs::path(cfg.out_dir) / "oracle-tree.txt").string(), oracle.tree, oracle.cost);
    v.require(res.best_tree.has_value(), "no successful evaluated tree");
    if (res.best_tree) {
      const double best = tree_cost(*res.best_tree, truth, cfg.lower.weights, cfg.lower.norm);
      const double gap = (best - oracle.cost) / oracle.cost;
      v.require(best <= ospf, "(a) best " + fmt(best) + " > ospf " + fmt(ospf));
      v.require(gap <= 0.05, "(b) oracle gap " + fmt(100 * gap) + "% > 5%");
      v.detail << "best " << fmt(best) << " (episode " << res.best_episode << "), ospf " << fmt(ospf)
               << ", oracle " << fmt(oracle.cost) << ", gap " << fmt(100 * gap) << "%";
    }
    v.require(secs < 1800.0, "runtime " + fmt(secs) + " s over 30 min");
    v.detail << ", " << fmt(std::round(secs)) << " s";
  }
}

// ---- 9: determinism ------------------------------------------------------

void determinism(Verdict& v) {
  std::string files[2];
  for (int run = 0; run < 2; ++run) {
    TrainConfig cfg;
    cfg.episodes = 200;
    cfg.workers = 3;
    cfg.out_dir = work_dir("criterion-9-" + std::to_string(run)).string();
    train(cfg);
    files[run] = slurp(fs::path(cfg.out_dir) / "metrics.csv");
  }
  v.require(!files[0].empty(), "empty metrics.csv");
  v.require(files[0] == files[1], "metrics.csv differs between runs");
  v.detail << files[0].size() << " bytes, identical=" << (files[0] == files[1] ? "yes" : "no");
}

// ---- 10: failsteps -------------------------------------------------------

int longest_random_episode(NamedTopology name, int episodes, int& budget, int& forced) {
  const Topology topo = build_named_topology(name, 7);
  const int n = topo.node_count();
  const MulticastRequest req{0, {n / 3, (2 * n) / 3, n - 1}};
  const ActionLayout lay(topo, req.overlay_nodes());
  LowerEnv env(topo, lay, {});
  budget = env.failsteps();
  Rng rng(derive_seed(10, "random-policy", static_cast<std::uint64_t>(n)));
  int longest = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    const int k = static_cast<int>(rng.below(3));
    std::vector<NodeId> cand{req.source};
    for (int i = 0; i < k; ++i) cand.push_back(req.destinations[i]);
    env.reset(cand, req.destinations[k]);
    while (!env.done()) {
      std::vector<int> legal;
      for (int a = 0; a < lay.action_count(); ++a)
        if (env.mask()[a]) legal.push_back(a);
      env.step(legal[rng.below(legal.size())]);
    }
    longest = std::max(longest, env.steps());
  }
  // Switching back and forth never moves, so only the budget can end it.
  env.reset({req.source, req.destinations[0]}, req.destinations[1]);
  while (!env.done()) {
    int sw = -1;
    for (int a = 0; a < lay.action_count() && sw < 0; ++a) {
      const ActionSlot* s = lay.slot(env.position(), a);
      if (env.mask()[a] && s && s->kind == SlotKind::Switch) sw = a;
    }
    if (sw < 0) break;
    env.step(sw);
  }
  forced = env.done() && !env.success() ? env.steps() : -1;
  return longest;
}

void failsteps(Verdict& v) {
  int b10 = 0, b21 = 0, f10 = 0, f21 = 0;
  const int l10 = longest_random_episode(NamedTopology::Net10, 1000, b10, f10);
  const int l21 = longest_random_episode(NamedTopology::Net21, 1000, b21, f21);
  v.require(b10 == 15 && b21 == 32, "budgets " + std::to_string(b10) + "/" + std::to_string(b21));
  v.require(l10 <= 15, "n=10 episode ran " + std::to_string(l10) + " steps");
  v.require(l21 <= 32, "n=21 episode ran " + std::to_string(l21) + " steps");
  v.require(f10 == 15 && f21 == 32, "switch-only episodes ended at " + std::to_string(f10) + "/" +
                                         std::to_string(f21));
  v.detail << "longest random " << l10 << "/15 (n=10), " << l21 << "/32 (n=21); switch-only episodes cut at "
           << f10 << " and " << f21;
}

const std::map<int, double> kLimits{{1, 1.0}, {2, 1.0}, {3, 30.0}, {4, 10.0}, {5, 10.0},
                                    {7, 300.0}, {9, 300.0}, {10, 30.0}};

void oracle_dominance(Verdict& v) {
  const CostWeights w;
  const NormalizationSpec spec;
  Rng rng(derive_seed(7, "instances"));
  int worse_ospf = 0, worse_greedy = 0, inconsistent = 0, strict_wins = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 5 + static_cast<int>(rng.below(6));
    const Topology g = build_random_topology(n, static_cast<int>(rng.below(n)), derive_seed(7, "topology", inst));
    std::vector<NodeId> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(nodes[i], nodes[rng.below(i + 1)]);
    const int k = 1 + static_cast<int>(rng.below(3));
    const MulticastRequest req{nodes[0], std::vector<NodeId>(nodes.begin() + 1, nodes.begin() + 1 + k)};
    const OracleResult r = brute_force_optimum(g, req, w, spec);
    const double ospf = tree_cost(ospf_tree(g, req), g, w, spec);
    const double greedy = tree_cost(greedy_tree(g, req, w, spec), g, w, spec);
    if (r.cost > ospf) ++worse_ospf;
    if (r.cost > greedy) ++worse_greedy;
    if (tree_cost(r.tree, g, w, spec) != r.cost) ++inconsistent;
    if (r.cost < ospf) ++strict_wins;
  }
  v.require(worse_ospf == 0, std::to_string(worse_ospf) + " instances with ospf below oracle");
  v.require(worse_greedy == 0, std::to_string(worse_greedy) + " instances with greedy below oracle");
  v.require(inconsistent == 0, std::to_string(inconsistent) + " oracle cost mismatches");
  v.detail << "100 instances, oracle strictly below ospf on " << strict_wins;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::stoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::sort(which.begin(), which.end());

  std::map<int, Verdict> verdicts;
  std::map<int, double> elapsed;
  const bool run_e2e = std::count(which.begin(), which.end(), 6) || std::count(which.begin(), which.end(), 8);
  for (int c : which) {
    if (c == 6 || c == 8) continue;
    Verdict& v = verdicts[c];
    const auto t0 = Clock::now();
    try {
      switch (c) {
        case 1: cost_math(v); break;
        case 2: telemetry_round_trip(v); break;
        case 3: gradient_checks(v); break;
        case 4: rl_math(v); break;
        case 5: mask_safety(v); break;
        case 7: oracle_dominance(v); break;
        case 9: determinism(v); break;
        case 10: failsteps(v); break;
        default: v.require(false, "unknown criterion");
      }
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    elapsed[c] = seconds_since(t0);
    if (auto it = kLimits.find(c); it != kLimits.end())
      v.require(elapsed[c] < it->second, "runtime " + fmt(elapsed[c]) + " s over " + fmt(it->second) + " s");
  }
  if (run_e2e) {
    const auto t0 = Clock::now();
    try {
      end_to_end(which, verdicts);
    } catch (const std::exception& e) {
      for (int c : {6, 8})
        if (std::count(which.begin(), which.end(), c)) verdicts[c].require(false, std::string("exception: ") + e.what());
    }
    for (int c : {6, 8}) elapsed[c] = seconds_since(t0);
  }

  bool all = true;
  for (int c : which) {
    const Verdict& v = verdicts[c];
    all = all && v.pass;
    std::cout << "criterion " << c << ": " << (v.pass ? "PASS" : "FAIL") << " (" << fmt(elapsed[c]) << " s) "
              << v.detail.str();
    for (const auto& f : v.failures) std::cout << " | " << f;
    std::cout << std::endl;
  }
  return all ? 0 : 1;
}
