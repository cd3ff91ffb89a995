#include "omtree/config.hpp"
#include "omtree/error.hpp"
#include "omtree/numfmt.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace omtree {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  if (!parse_number(v, out)) throw Error(ErrorCode::Parse, "bad value for " + key + ": '" + v + "'");
  return out;
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::Parse, "bad boolean for " + key + ": '" + v + "'");
}

std::string join(const std::vector<NodeId>& v) {
  std::string s;
  for (NodeId x : v) {
    if (!s.empty()) s.push_back(',');
    s += std::to_string(x);
  }
  return s;
}

}  // namespace

std::vector<NodeId> parse_node_list(const std::string& s) {
  std::vector<NodeId> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string tok = trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    NodeId v = 0;
    if (!parse_number(tok, v)) throw Error(ErrorCode::Parse, "bad node list '" + s + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void apply_config_value(TrainConfig& c, const std::string& key, const std::string& v) {
  if (key == "episodes") c.episodes = number<int>(key, v);
  else if (key == "topology") c.topology = v;
  else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
  else if (key == "source") c.request.source = number<NodeId>(key, v);
  else if (key == "dests") c.request.destinations = parse_node_list(v);
  else if (key == "traffic") {
    const auto m = parse_traffic_mode(v);
    if (!m) throw Error(ErrorCode::Parse, "bad traffic mode '" + v + "'");
    c.traffic = *m;
  }
  else if (key == "workers") c.workers = number<int>(key, v);
  else if (key == "eval_interval") c.eval_interval = number<int>(key, v);
  else if (key == "checkpoint_interval") c.checkpoint_interval = number<int>(key, v);
  else if (key == "dense_width") c.dense_width = number<int>(key, v);
  else if (key == "ppo.clip") c.ppo.clip = number<double>(key, v);
  else if (key == "ppo.gamma") c.ppo.gamma = number<double>(key, v);
  else if (key == "ppo.lambda") c.ppo.lambda = number<double>(key, v);
  else if (key == "ppo.epochs") c.ppo.epochs = number<int>(key, v);
  else if (key == "ppo.actor_lr") c.ppo.actor_lr = number<double>(key, v);
  else if (key == "ppo.critic_lr") c.ppo.critic_lr = number<double>(key, v);
  else if (key == "ppo.normalize_advantages") c.ppo.normalize_advantages = boolean(key, v);
  else if (key == "sac.gamma") c.sac.gamma = number<double>(key, v);
  else if (key == "sac.tau") c.sac.tau = number<double>(key, v);
  else if (key == "sac.initial_alpha") c.sac.initial_alpha = number<double>(key, v);
  else if (key == "sac.target_entropy_scale") c.sac.target_entropy_scale = number<double>(key, v);
  else if (key == "sac.batch_size") c.sac.batch_size = number<std::size_t>(key, v);
  else if (key == "sac.capacity") c.sac.capacity = number<std::size_t>(key, v);
  else if (key == "sac.min_fill") c.sac.min_fill = number<std::size_t>(key, v);
  else if (key == "sac.critic_lr") c.sac.critic_lr = number<double>(key, v);
  else if (key == "sac.actor_lr") c.sac.actor_lr = number<double>(key, v);
  else if (key == "sac.alpha_lr") c.sac.alpha_lr = number<double>(key, v);
  else if (key == "lower.r_step") c.lower.r_step = number<double>(key, v);
  else if (key == "lower.r_terminal_success") c.lower.r_terminal_success = number<double>(key, v);
  else if (key == "lower.r_terminal_fail") c.lower.r_terminal_fail = number<double>(key, v);
  else if (key == "lower.failsteps") c.lower.failsteps = number<int>(key, v);
  else if (key == "cost.beta1") c.lower.weights.beta1 = number<double>(key, v);
  else if (key == "cost.beta2") c.lower.weights.beta2 = number<double>(key, v);
  else if (key == "cost.beta3") c.lower.weights.beta3 = number<double>(key, v);
  else if (key == "norm.bw_ref") c.lower.norm.bw_ref = number<double>(key, v);
  else if (key == "norm.delay_ref") c.lower.norm.delay_ref = number<double>(key, v);
  else throw Error(ErrorCode::Parse, "unknown config key '" + key + "'");
}

TrainConfig read_config(std::istream& in, TrainConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    apply_config_value(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return base;
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  return read_config(in, std::move(base));
}

void write_config(std::ostream& out, const TrainConfig& c) {
  auto d = [](double x) { return format_double(x); };
  out << "episodes = " << c.episodes << '\n'
      << "topology = " << c.topology << '\n'
      << "seed = " << c.seed << '\n'
      << "source = " << c.request.source << '\n'
      << "dests = " << join(c.request.destinations) << '\n'
      << "traffic = " << to_string(c.traffic) << '\n'
      << "workers = " << c.workers << '\n'
      << "eval_interval = " << c.eval_interval << '\n'
      << "checkpoint_interval = " << c.checkpoint_interval << '\n'
      << "dense_width = " << c.dense_width << '\n'
      << "ppo.clip = " << d(c.ppo.clip) << '\n'
      << "ppo.gamma = " << d(c.ppo.gamma) << '\n'
      << "ppo.lambda = " << d(c.ppo.lambda) << '\n'
      << "ppo.epochs = " << c.ppo.epochs << '\n'
      << "ppo.actor_lr = " << d(c.ppo.actor_lr) << '\n'
      << "ppo.critic_lr = " << d(c.ppo.critic_lr) << '\n'
      << "ppo.normalize_advantages = " << (c.ppo.normalize_advantages ? "true" : "false") << '\n'
      << "sac.gamma = " << d(c.sac.gamma) << '\n'
      << "sac.tau = " << d(c.sac.tau) << '\n'
      << "sac.initial_alpha = " << d(c.sac.initial_alpha) << '\n'
      << "sac.target_entropy_scale = " << d(c.sac.target_entropy_scale) << '\n'
      << "sac.batch_size = " << c.sac.batch_size << '\n'
      << "sac.capacity = " << c.sac.capacity << '\n'
      << "sac.min_fill = " << c.sac.min_fill << '\n'
      << "sac.critic_lr = " << d(c.sac.critic_lr) << '\n'
      << "sac.actor_lr = " << d(c.sac.actor_lr) << '\n'
      << "sac.alpha_lr = " << d(c.sac.alpha_lr) << '\n'
      << "lower.r_step = " << d(c.lower.r_step) << '\n'
      << "lower.r_terminal_success = " << d(c.lower.r_terminal_success) << '\n'
      << "lower.r_terminal_fail = " << d(c.lower.r_terminal_fail) << '\n'
      << "lower.failsteps = " << c.lower.failsteps << '\n'
      << "cost.beta1 = " << d(c.lower.weights.beta1) << '\n'
      << "cost.beta2 = " << d(c.lower.weights.beta2) << '\n'
      << "cost.beta3 = " << d(c.lower.weights.beta3) << '\n'
      << "norm.bw_ref = " << d(c.lower.norm.bw_ref) << '\n'
      << "norm.delay_ref = " << d(c.lower.norm.delay_ref) << '\n';
}

void save_config(const std::string& path, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write config " + path);
  write_config(out, cfg);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace omtree
