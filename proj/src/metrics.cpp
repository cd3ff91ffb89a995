#include "omtree/metrics.hpp"
#include "omtree/error.hpp"
#include "omtree/numfmt.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace omtree {

TreeMetrics evaluate_tree(const OverlayTree& tree, const Topology& topo) {
  tree.validate_against(topo);
  TreeMetrics m;
  for (NodeId d : tree.request().destinations) {
    RouteMetrics r;
    r.destination = d;
    r.route = end_to_end_route(tree, d);
    r.metrics = route_metrics(topo, r.route);
    m.avg_bottleneck_bw += r.metrics.bw_bottleneck;
    m.avg_delay += r.metrics.delay_total;
    m.avg_loss += r.metrics.loss_total;
    m.routes.push_back(std::move(r));
  }
  const double k = static_cast<double>(m.routes.size());
  m.avg_bottleneck_bw /= k;
  m.avg_delay /= k;
  m.avg_loss /= k;
  return m;
}

namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

constexpr int kColumns = 19;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, int line_no) {
  double v = 0.0;
  if (!parse_number(s, v))
    throw Error(ErrorCode::Parse, "metrics line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s, int line_no) {
  int v = 0;
  if (!parse_number(s, v))
    throw Error(ErrorCode::Parse, "metrics line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

bool MetricsRow::operator==(const MetricsRow& o) const {
  return episode == o.episode && sequence == o.sequence && same(r_seq, o.r_seq) && success == o.success &&
         success_flags == o.success_flags && lower_steps == o.lower_steps && same(tree_cost, o.tree_cost) &&
         same(avg_bw, o.avg_bw) && same(avg_delay, o.avg_delay) && same(avg_loss, o.avg_loss) &&
         same(eval_cost, o.eval_cost) && same(ppo_policy_loss, o.ppo_policy_loss) &&
         same(ppo_value_loss, o.ppo_value_loss) && same(ppo_entropy, o.ppo_entropy) &&
         same(ppo_mean_ratio, o.ppo_mean_ratio) && same(sac_critic_loss, o.sac_critic_loss) &&
         same(sac_policy_loss, o.sac_policy_loss) && same(sac_alpha, o.sac_alpha) &&
         sac_updates == o.sac_updates;
}

const char* const kMetricsHeader =
    "episode,sequence,r_seq,success,success_flags,lower_steps,tree_cost,avg_bw,avg_delay,avg_loss,"
    "eval_cost,ppo_policy_loss,ppo_value_loss,ppo_entropy,ppo_mean_ratio,sac_critic_loss,"
    "sac_policy_loss,sac_alpha,sac_updates";

std::string format_row(const MetricsRow& r) {
  std::string s;
  auto add = [&](const std::string& v) {
    if (!s.empty()) s.push_back(',');
    s += v;
  };
  add(std::to_string(r.episode));
  add(r.sequence);
  add(format_double(r.r_seq));
  add(r.success ? "1" : "0");
  add(r.success_flags);
  add(std::to_string(r.lower_steps));
  for (double v : {r.tree_cost, r.avg_bw, r.avg_delay, r.avg_loss, r.eval_cost, r.ppo_policy_loss,
                   r.ppo_value_loss, r.ppo_entropy, r.ppo_mean_ratio, r.sac_critic_loss, r.sac_policy_loss,
                   r.sac_alpha})
    add(format_double(v));
  add(std::to_string(r.sac_updates));
  return s;
}

void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows,
                   const std::optional<MetricsSummary>& summary) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
  if (rows.empty() || !summary) return;
  out << "# best_episode " << summary->best_episode << '\n';
  out << "# best_tree_cost " << format_double(summary->best_tree_cost) << '\n';
  if (summary->oracle_cost) {
    out << "# oracle_cost " << format_double(*summary->oracle_cost) << '\n';
    if (summary->best_episode >= 0 && *summary->oracle_cost > 0.0)
      out << "# oracle_gap " << format_double(summary->best_tree_cost / *summary->oracle_cost - 1.0) << '\n';
  }
}

void emit_metrics(const std::string& path, const std::vector<MetricsRow>& rows,
                  const std::optional<MetricsSummary>& summary) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_metrics(out, rows, summary);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

MetricsFile read_metrics(std::istream& in) {
  MetricsFile f;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw Error(ErrorCode::Parse, "metrics file lacks the expected header");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      f.summary_lines.push_back(line);
      continue;
    }
    const auto c = split_csv(line);
    if (static_cast<int>(c.size()) != kColumns)
      throw Error(ErrorCode::Parse, "metrics line " + std::to_string(line_no) + ": wrong column count");
    MetricsRow r;
    r.episode = to_int(c[0], line_no);
    r.sequence = c[1];
    r.r_seq = to_double(c[2], line_no);
    r.success = c[3] == "1";
    r.success_flags = c[4];
    r.lower_steps = to_int(c[5], line_no);
    double* fields[] = {&r.tree_cost, &r.avg_bw, &r.avg_delay, &r.avg_loss, &r.eval_cost,
                        &r.ppo_policy_loss, &r.ppo_value_loss, &r.ppo_entropy, &r.ppo_mean_ratio,
                        &r.sac_critic_loss, &r.sac_policy_loss, &r.sac_alpha};
    for (int i = 0; i < 12; ++i) *fields[i] = to_double(c[6 + i], line_no);
    r.sac_updates = to_int(c[18], line_no);
    f.rows.push_back(std::move(r));
  }
  return f;
}

MetricsFile load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_metrics(in);
}

}  // namespace omtree
