#include "omtree/baselines.hpp"
#include "omtree/error.hpp"
#include "omtree/orchestrator.hpp"
#include "omtree/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace omtree;
namespace fs = std::filesystem;

namespace {

SacConfig small_sac() {
  SacConfig s;
  s.batch_size = 4;
  s.min_fill = 8;
  s.capacity = 1000;
  return s;
}

std::vector<SacAgent> make_agents(const ApproximatorSpec& spec, int count, std::uint64_t seed) {
  std::vector<SacAgent> agents;
  for (int i = 0; i < count; ++i) agents.emplace_back(spec, small_sac(), derive_seed(seed, "lower", i));
  return agents;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("omtree_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunEpisode, StubLowerGivesTelescopingUpperRewards) {
  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  const MulticastRequest req{0, {3, 6, 9}};
  const CostWeights w;
  const NormalizationSpec spec;
  UpperEnv env(topo, req);
  PpoAgent ppo(3, PpoConfig{}, 5);
  const LowerExecutor stub = [&](const std::vector<LowerTask>& tasks) {
    std::vector<LowerRun> out;
    for (const auto& t : tasks) {
      LowerRun r;
      r.result.chosen_source = t.candidates.front();
      r.result.path = min_hop_path(topo, r.result.chosen_source, t.destination);
      r.result.feedback_reward = path_link_reward(topo, r.result.path, w, spec);
      r.result.success = true;
      out.push_back(r);
    }
    return out;
  };
  Trajectory traj;
  const EpisodeRecord rec = run_episode(env, ppo, stub, topo, w, spec, true, &traj);

  const DistanceMatrices d = build_distance_matrices(topo, req);
  std::vector<double> expect;
  double r_seq = 0.0;
  int prev = -1;
  for (NodeId dest : rec.sequence.order) {
    const int i = req.index_of(dest);
    expect.push_back(prev < 0 ? -d.sndm(i, i) : -d.ndm(prev, i));
    prev = i;
    r_seq += path_link_reward(topo, min_hop_path(topo, 0, dest), w, spec);
  }
  ASSERT_EQ(traj.steps.size(), 3u);
  EXPECT_EQ(rec.upper_rewards, expect);
  EXPECT_DOUBLE_EQ(rec.r_seq, r_seq);
  EXPECT_DOUBLE_EQ(traj.steps[2].reward, expect[2] + r_seq);
  EXPECT_EQ(traj.steps[0].reward, expect[0]);
  ASSERT_TRUE(rec.success());
  EXPECT_EQ(rec.tree_cost, tree_cost(ospf_tree(topo, req), topo, w, spec));
  EXPECT_EQ(rec.tasks[1].candidates, (std::vector<NodeId>{0, rec.sequence.order[0]}));
}

TEST(RunLowerEpisode, EvaluationLeavesAgentUntouched) {
  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  const ActionLayout lay(topo, {0, 3, 6, 9});
  auto agents = make_agents(lower_network_spec(10, lay.action_count(), 16), 1, 3);
  const Eigen::VectorXd before = agents[0].actor().values;
  const LowerRun r = run_lower_episode(agents[0], topo, lay, {}, {0, {0}, 3}, false);
  EXPECT_EQ(agents[0].buffer().size(), 0u);
  EXPECT_EQ(agents[0].actor().values, before);
  EXPECT_EQ(r.tally.updates, 0);
  run_lower_episode(agents[0], topo, lay, {}, {0, {0}, 3}, true);
  EXPECT_GT(agents[0].buffer().size(), 0u);
}

TEST(DispatchParallel, MatchesSequential) {
  const Topology topo = build_named_topology(NamedTopology::Net10, 7);
  const ActionLayout lay(topo, {0, 3, 6, 9});
  const ApproximatorSpec spec = lower_network_spec(10, lay.action_count(), 16);
  auto seq = make_agents(spec, 3, 11);
  auto par = make_agents(spec, 3, 11);
  const std::vector<LowerTask> tasks{{1, {0}, 6}, {0, {0, 6}, 3}, {2, {0, 6, 3}, 9}};
  for (int round = 0; round < 6; ++round) {
    const auto a = dispatch_parallel(seq, topo, lay, {}, tasks, true, 1);
    const auto b = dispatch_parallel(par, topo, lay, {}, tasks, true, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].result.path, b[i].result.path);
      EXPECT_EQ(a[i].result.feedback_reward, b[i].result.feedback_reward);
      EXPECT_EQ(a[i].result.chosen_source, b[i].result.chosen_source);
      EXPECT_EQ(a[i].tally.updates, b[i].tally.updates);
      EXPECT_EQ(a[i].tally.critic_loss, b[i].tally.critic_loss);
    }
  }
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(seq[i].actor().values, par[i].actor().values);
    EXPECT_EQ(seq[i].target(1).values, par[i].target(1).values);
  }
}

TEST(Train, SingleEpisodeWritesRunDirectory) {
  TrainConfig cfg;
  cfg.episodes = 1;
  cfg.out_dir = fresh_dir("train1").string();
  cfg.dense_width = 16;
  cfg.sac = small_sac();
  const TrainResult r = train(cfg);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].episode, 0);
  const MetricsFile f = load_metrics(cfg.out_dir + "/metrics.csv");
  ASSERT_EQ(f.rows.size(), 1u);
  EXPECT_EQ(f.rows[0], r.rows[0]);
  EXPECT_TRUE(fs::exists(cfg.out_dir + "/config.copy"));
  EXPECT_TRUE(fs::exists(cfg.out_dir + "/checkpoints/agent-ppo.ckpt"));
  EXPECT_TRUE(fs::exists(cfg.out_dir + "/checkpoints/agent-sac-2.ckpt"));
  EXPECT_FALSE(fs::exists(cfg.out_dir + "/PARTIAL"));
  fs::remove_all(cfg.out_dir);
}

TEST(Train, RepeatableMetrics) {
  TrainConfig cfg;
  cfg.episodes = 6;
  cfg.eval_interval = 2;
  cfg.dense_width = 16;
  cfg.sac = small_sac();
  cfg.workers = 2;
  cfg.out_dir = fresh_dir("repeat_a").string();
  std::vector<double> rewards;
  train(cfg, [&](const EpisodeRecord& rec, const Topology&) { rewards.push_back(rec.r_seq); });
  EXPECT_EQ(rewards.size(), 6u);
  const std::string a = slurp(cfg.out_dir + "/metrics.csv");
  fs::remove_all(cfg.out_dir);
  cfg.out_dir = fresh_dir("repeat_b").string();
  cfg.workers = 1;
  train(cfg);
  EXPECT_EQ(slurp(cfg.out_dir + "/metrics.csv"), a);
  fs::remove_all(cfg.out_dir);
}

TEST(EvaluateRun, MissingCheckpointsIsIoError) {
  TrainConfig cfg;
  cfg.out_dir = fresh_dir("nockpt").string();
  try {
    evaluate_run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.episodes = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.episodes = 1;
  cfg.workers = 0;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(resolve_topology("12NodeNet", 1), Error);
}
