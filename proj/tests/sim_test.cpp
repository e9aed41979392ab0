// Copyright 2026 The snow-lpwan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "snow/sim/simulator.hpp"

#include <gtest/gtest.h>

#include "snow/presets.hpp"

namespace snow::sim {
namespace {

// One 6 MHz channel, per-subcarrier ACKs, no join exchange.
ScenarioConfig base(std::size_t nodes, TrafficConfig traffic) {
  ScenarioConfig c;
  c.spectrum.start_hz = 547'000'000;
  c.spectrum.end_hz = 553'000'000;
  c.mac.ack_mode = mac::AckMode::kPerSubcarrier;
  c.channel.noiseless = true;
  c.nodes = ring_nodes(nodes, 200.0, {0, 0}, traffic);
  c.run.horizon_ticks = 2'000'000;
  return c;
}

TrafficConfig periodic(std::int64_t period, std::size_t packets = 0) {
  TrafficConfig t;
  t.kind = TrafficKind::kPeriodic;
  t.period_ticks = period;
  t.packets = packets;
  return t;
}

TrafficConfig saturated() {
  TrafficConfig t;
  t.kind = TrafficKind::kSaturated;
  return t;
}

TEST(Simulator, SingleNodeLatencyMatchesClosedForm) {
  auto c = base(1, periodic(10'000, 100));
  const auto r = run_scenario(c).report;
  const auto& m = r.aggregate;
  EXPECT_EQ(m.generated, 100u);
  EXPECT_EQ(m.sent, 100u);
  EXPECT_EQ(m.delivered, 100u);
  EXPECT_DOUBLE_EQ(m.prr, 1.0);
  // Wake back-off uniform on [0, W), one CCA tick, then the frame.
  const double airtime = static_cast<double>(phy::frame_bit_count(28) * 8);
  const double expected = (static_cast<double>(c.mac.backoff.initial_window - 1) / 2.0 + 1.0 + airtime) /
                          c.run.chip_rate_hz;
  EXPECT_NEAR(m.mean_latency_s, expected, 4.0 / c.run.chip_rate_hz);
}

TEST(Simulator, ThroughputScalesWithConcurrentNodes) {
  const auto one = run_scenario(base(1, saturated())).report.aggregate.throughput_bps;
  const auto all = run_scenario(base(29, saturated())).report.aggregate.throughput_bps;
  EXPECT_GT(one, 0.0);
  EXPECT_NEAR(all / one, 29.0, 29.0 * 0.05);
}

TEST(Simulator, IdleScenarioOnlySleeps) {
  auto t = periodic(1000);
  t.start_ticks = 10'000'000;  // past the horizon
  auto c = base(3, t);
  const auto r = run_scenario(c).report;
  const double horizon_s = static_cast<double>(c.run.horizon_ticks) / c.run.chip_rate_hz;
  const double sleep_mj = EnergyProfile::cc1070().current_a(RadioState::kSleep) * 3.0 * horizon_s * 1e3;
  for (const auto& n : r.nodes) {
    EXPECT_EQ(n.transmissions, 0u);
    EXPECT_NEAR(n.energy_mj, sleep_mj, 1e-12);
  }
}

TEST(Simulator, DeterministicReportsAndTraces) {
  auto c = load_preset("ch3-defaults");
  c.run.horizon_ticks = 400'000;
  c.run.trace = true;
  const auto a = run_scenario(c);
  const auto b = run_scenario(c);
  EXPECT_EQ(report_to_yaml(a.report), report_to_yaml(b.report));
  EXPECT_EQ(a.trace.csv(), b.trace.csv());
  c.run.seed = 2;
  EXPECT_NE(report_to_yaml(run_scenario(c).report), report_to_yaml(a.report));
}

TEST(Simulator, ConservationAndLedger) {
  auto c = load_preset("ch3-defaults");
  c.run.horizon_ticks = 800'000;
  c.run.trace = true;
  c.mac.allocation = AllocationRule::kShared;  // force collisions
  c.nodes.resize(6);
  const auto res = run_scenario(c);
  const auto& a = res.report.aggregate;
  EXPECT_GT(a.collided, 0u);
  EXPECT_EQ(a.transmissions, a.tx_delivered + a.crc_failed + a.collided);
  EXPECT_EQ(res.trace.count("tx_start"), a.transmissions + res.report.in_flight);
  EXPECT_EQ(res.trace.count("delivered") + res.trace.count("crc_failed") + res.trace.count("collided"),
            a.transmissions);
  EXPECT_LE(a.delivered, a.sent);
  EXPECT_LE(a.sent, a.generated);
  for (const auto& n : res.report.nodes) {
    std::int64_t total = 0;
    for (auto t : n.state_ticks) total += t;
    EXPECT_EQ(total, c.run.horizon_ticks) << n.id;
  }
}

TEST(Simulator, BaseStationReceivesWhileAckInFlight) {
  auto c = base(8, saturated());
  c.mac.ack_mode = mac::AckMode::kBitVector;
  c.mac.downlink_subcarrier = 28;
  c.run.horizon_ticks = 200'000;
  c.run.trace = true;
  const auto res = run_scenario(c);
  const auto ack = static_cast<Tick>(mac::ack_frame_chips(mac::AckMode::kBitVector, c.plan().size(), 8));
  std::vector<Tick> starts;
  for (const auto& e : res.trace.events()) {
    if (e.event == "ack_tx_start" && e.subcarrier == 28) starts.push_back(e.tick);
  }
  ASSERT_FALSE(starts.empty());
  std::size_t overlapping = 0;
  for (const auto& e : res.trace.events()) {
    if (e.event != "delivered") continue;
    for (Tick s : starts) overlapping += e.tick > s && e.tick < s + ack;
  }
  EXPECT_GT(overlapping, 0u);
  EXPECT_DOUBLE_EQ(res.report.aggregate.prr, 1.0);
}

TEST(Simulator, TreePresetRunsEveryBaseStation) {
  auto c = load_preset("ch5-tree-3");
  c.run.horizon_ticks = 400'000;
  const auto r = run_scenario(c).report;
  EXPECT_EQ(r.base_stations, 3u);
  ASSERT_TRUE(r.sop.has_value());
  EXPECT_TRUE(r.sop->tree_link_error.empty());
  EXPECT_EQ(r.sop->tree_links.size(), 2u);
  std::set<int> used;
  for (const auto& [link, sc] : r.sop->tree_links) used.insert(sc);
  EXPECT_EQ(used.size(), 2u);
  EXPECT_EQ(r.nodes.size(), 9u);
  for (const auto& n : r.nodes) EXPECT_GT(n.delivered, 0u) << n.id;
}

TEST(Simulator, FullPhyDeliversNoiselessTraffic) {
  auto c = base(4, periodic(20'000, 5));
  c.run.phy_mode = PhyMode::kFull;
  c.run.horizon_ticks = 150'000;
  const auto r = run_scenario(c).report;
  EXPECT_EQ(r.aggregate.delivered, 20u);
  EXPECT_GT(r.fft_executions, 0u);
  EXPECT_EQ(r.aggregate.crc_failed, 0u);
}

TEST(Simulator, FullAndAbstractAgreeAtHighSnr) {
  auto c = base(3, periodic(20'000, 5));
  c.channel.noiseless = false;
  c.run.horizon_ticks = 150'000;
  const auto abstract = run_scenario(c).report;
  c.run.phy_mode = PhyMode::kFull;
  const auto full = run_scenario(c).report;
  EXPECT_EQ(abstract.aggregate.delivered, 15u);
  EXPECT_EQ(full.aggregate.delivered, 15u);
}

TEST(Simulator, RejectsBitVectorWithoutDownlinkInCode) {
  auto c = base(1, periodic(1000));
  c.mac.ack_mode = mac::AckMode::kBitVector;
  EXPECT_THROW(run_scenario(c), ConfigError);
}

}  // namespace
}  // namespace snow::sim
