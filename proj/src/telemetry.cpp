#include "omtree/telemetry.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <cmath>

namespace omtree {

namespace {
constexpr double kBitsPerByte = 8.0;
constexpr double kBitsPerMbit = 1e6;
}  // namespace

double derive_residual_bandwidth(const PortCounters& earlier, const PortCounters& later,
                                 double bw_max) {
  const double dt = later.tdur - earlier.tdur;
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidInterval, "sample interval must be positive");
  // Byte sums can exceed 2^53 only after ~10^15 bytes; differences stay exact.
  const auto sum_e = earlier.txb + earlier.rxb;
  const auto sum_l = later.txb + later.rxb;
  const double diff = sum_l >= sum_e ? static_cast<double>(sum_l - sum_e)
                                     : static_cast<double>(sum_e - sum_l);
  const double used_mbps = diff * kBitsPerByte / kBitsPerMbit / dt;
  return std::clamp(bw_max - used_mbps, 0.0, bw_max);
}

double derive_loss_rate(std::uint64_t txp_i, std::uint64_t rxp_j) {
  if (txp_i == 0) throw Error(ErrorCode::UndefinedRate, "no packets transmitted");
  if (rxp_j > txp_i) throw Error(ErrorCode::CounterInconsistency, "received more than transmitted");
  return static_cast<double>(txp_i - rxp_j) / static_cast<double>(txp_i);
}

double derive_link_delay(const ProbeTimings& p) {
  const double d = (p.t_lldp_fwd + p.t_lldp_rev - p.rtt_i - p.rtt_j) / 2.0;
  if (d < 0.0) throw Error(ErrorCode::ProbeInconsistency, "probe totals below control round trips");
  return d;
}

double clamp_loss(double loss) { return std::clamp(loss, 0.0, 1.0 - kLossEpsilon); }

LinkTelemetry synthesize_telemetry(const LinkState& truth, double c_i, double c_j,
                                   const TelemetryOptions& opts, Rng& rng) {
  LinkTelemetry t;
  // Arbitrary counter history before the window.
  t.earlier.txb = rng.below(1ULL << 40);
  t.earlier.rxb = rng.below(1ULL << 40);
  t.earlier.txp = rng.below(1ULL << 32);
  t.earlier.rxp = rng.below(1ULL << 32);
  t.earlier.tdur = rng.uniform(10.0, 1000.0);

  const double used_mbps = truth.bw_max - truth.bw_residual;
  const double bytes = used_mbps * kBitsPerMbit / kBitsPerByte * opts.window_s;
  const auto total = static_cast<std::uint64_t>(std::llround(bytes));
  const std::uint64_t tx_share = total / 2;
  t.later = t.earlier;
  t.later.txb += tx_share;
  t.later.rxb += total - tx_share;
  t.later.tdur = t.earlier.tdur + opts.window_s;

  t.txp_i = opts.packets;
  const double received = static_cast<double>(opts.packets) * (1.0 - truth.loss);
  t.rxp_j = std::min<std::uint64_t>(opts.packets, static_cast<std::uint64_t>(std::llround(received)));
  t.later.txp += t.txp_i;
  t.later.rxp += t.rxp_j;

  // Probe from i to j: controller -> i, link, j -> controller; and reverse.
  t.probes.t_lldp_fwd = c_i + truth.delay + c_j;
  t.probes.t_lldp_rev = c_j + truth.delay + c_i;
  t.probes.rtt_i = 2.0 * c_i;
  t.probes.rtt_j = 2.0 * c_j;
  return t;
}

LinkState derive_link_state(const LinkTelemetry& t, double bw_max) {
  LinkState l;
  l.bw_max = bw_max;
  l.bw_residual = derive_residual_bandwidth(t.earlier, t.later, bw_max);
  l.loss = clamp_loss(derive_loss_rate(t.txp_i, t.rxp_j));
  l.delay = derive_link_delay(t.probes);
  return l;
}

Topology measure_snapshot(const Topology& truth, std::uint64_t seed, const TelemetryOptions& opts) {
  Rng rng(derive_seed(seed, "telemetry"));
  std::vector<double> controller(truth.node_count());
  for (auto& c : controller) c = rng.uniform(opts.controller_delay_min, opts.controller_delay_max);
  std::vector<LinkState> links;
  links.reserve(truth.links().size());
  for (int k = 0; k < truth.edge_count(); ++k) {
    const Edge& e = truth.edges()[k];
    const LinkState& l = truth.links()[k];
    const LinkTelemetry t = synthesize_telemetry(l, controller[e.u], controller[e.v], opts, rng);
    LinkState d = derive_link_state(t, l.bw_max);
    // Keep the strict delay > 0 invariant under rounding.
    if (d.delay <= 0.0) d.delay = l.delay;
    links.push_back(d);
  }
  return truth.with_link_states(std::move(links));
}

}  // namespace omtree
