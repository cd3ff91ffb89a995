#pragma once

#include "omtree/net_model.hpp"
#include "omtree/rng.hpp"

#include <cstdint>

namespace omtree {

/// One port-statistics sample for one side of a link.
struct PortCounters {
  std::uint64_t txp = 0, rxp = 0;  // packets
  std::uint64_t txb = 0, rxb = 0;  // bytes
  double tdur = 0.0;               // seconds of accumulation
};

/// LLDP-style probe totals and controller round trips, all in ms.
struct ProbeTimings {
  double t_lldp_fwd = 0.0, t_lldp_rev = 0.0;
  double rtt_i = 0.0, rtt_j = 0.0;
};

inline constexpr double kLossEpsilon = 1e-6;

/// Residual bandwidth (Mbps) from two consecutive samples of the same port:
/// bw_max - |bytes_later - bytes_earlier| * 8 / 1e6 / dt, clamped to [0, bw_max].
double derive_residual_bandwidth(const PortCounters& earlier, const PortCounters& later,
                                 double bw_max);
/// (txp_i - rxp_j) / txp_i.
double derive_loss_rate(std::uint64_t txp_i, std::uint64_t rxp_j);
/// (t_fwd + t_rev - rtt_i - rtt_j) / 2.
double derive_link_delay(const ProbeTimings& probes);
double clamp_loss(double loss);

/// Everything the controller would read for one link in one polling round.
struct LinkTelemetry {
  PortCounters earlier;    // side i, first poll
  PortCounters later;      // side i, second poll
  std::uint64_t txp_i = 0; // packets sent by i over the window
  std::uint64_t rxp_j = 0; // of those, received by j
  ProbeTimings probes;
};

struct TelemetryOptions {
  double window_s = 3600.0;
  std::uint64_t packets = 1'000'000'000'000ULL;
  double controller_delay_min = 0.5, controller_delay_max = 3.0;  // one-way, ms
};

/// Synthesizes counters and probe timings consistent with a ground-truth link.
/// c_i, c_j are the one-way controller attachment delays of the two ends.
LinkTelemetry synthesize_telemetry(const LinkState& truth, double c_i, double c_j,
                                   const TelemetryOptions& opts, Rng& rng);

/// Counter-to-metric pipeline; derived values clamped into legal ranges.
LinkState derive_link_state(const LinkTelemetry& t, double bw_max);

/// Simulated controller polling: synthesize telemetry for every link of the
/// ground truth and rebuild the snapshot from the derived metrics.
/// Deterministic in (truth, seed).
Topology measure_snapshot(const Topology& truth, std::uint64_t seed,
                          const TelemetryOptions& opts = {});

}  // namespace omtree
