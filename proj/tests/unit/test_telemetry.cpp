#include "omtree/error.hpp"
#include "omtree/telemetry.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace omtree;

TEST(Telemetry, ResidualBandwidthFromByteCounters) {
  PortCounters a{0, 0, 0, 0, 10.0}, b{0, 0, 12'500'000, 0, 20.0};
  // 12.5 MB over 10 s = 10 Mbps consumed.
  EXPECT_DOUBLE_EQ(derive_residual_bandwidth(a, b, 40.0), 30.0);
  EXPECT_DOUBLE_EQ(derive_residual_bandwidth(a, b, 5.0), 0.0);
  PortCounters same = a;
  EXPECT_THROW(derive_residual_bandwidth(a, same, 40.0), Error);
}

TEST(Telemetry, LossRate) {
  EXPECT_DOUBLE_EQ(derive_loss_rate(1000, 990), 0.01);
  EXPECT_DOUBLE_EQ(derive_loss_rate(1000, 1000), 0.0);
  EXPECT_THROW(derive_loss_rate(0, 0), Error);
  EXPECT_THROW(derive_loss_rate(10, 11), Error);
}

TEST(Telemetry, LinkDelaySubtractsControllerLegs) {
  ProbeTimings p{6.0, 8.0, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(derive_link_delay(p), 4.0);
  ProbeTimings bad{1.0, 1.0, 2.0, 4.0};
  EXPECT_THROW(derive_link_delay(bad), Error);
}

TEST(Telemetry, ClampLoss) {
  EXPECT_EQ(clamp_loss(1.0), 1.0 - kLossEpsilon);
  EXPECT_EQ(clamp_loss(-0.1), 0.0);
  EXPECT_EQ(clamp_loss(0.25), 0.25);
}

TEST(Telemetry, SnapshotIsDeterministicAndClose) {
  const Topology truth = build_named_topology(NamedTopology::Net10, 7);
  const Topology a = measure_snapshot(truth, 99), b = measure_snapshot(truth, 99);
  EXPECT_EQ(a, b);
  for (int k = 0; k < truth.edge_count(); ++k) {
    const auto& t = truth.links()[k];
    const auto& m = a.links()[k];
    EXPECT_NEAR(m.bw_residual, t.bw_residual, 1e-6 * t.bw_max);
    EXPECT_NEAR(m.delay, t.delay, 1e-6 * t.delay);
    EXPECT_NEAR(m.loss, t.loss, 1e-6);
  }
}
