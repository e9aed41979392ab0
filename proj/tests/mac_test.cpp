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


#include "snow/mac.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "snow/channel.hpp"
#include "snow/phy/decoder.hpp"
#include "snow/phy/papr.hpp"
#include "snow/rng.hpp"

namespace snow::mac {
namespace {

SubcarrierPlan ch_plan() {
  return plan_subcarriers(SpectrumBand{547'000'000, 553'000'000, {}}, 400'000, 0.5);
}

SubcarrierPlan small_plan(std::size_t n) {
  // n subcarriers at 200 kHz spacing.
  return plan_subcarriers(SpectrumBand{0, static_cast<Hz>(n + 1) * 200'000, {}}, 400'000, 0.5);
}

// --- hidden sets -------------------------------------------------------------

TEST(HiddenSets, CloseNodesHearEachOther) {
  const Audibility a{100.0, 1000.0, {}};
  const auto h = hidden_sets({{1, {0, 0}}, {2, {10, 0}}}, a);
  EXPECT_TRUE(h.at(1).empty());
  EXPECT_TRUE(h.at(2).empty());
}

TEST(HiddenSets, FarPairIsMutuallyHidden) {
  const Audibility a{100.0, 1000.0, {}};
  const auto h = hidden_sets({{1, {-125, 0}}, {2, {125, 0}}}, a);
  EXPECT_EQ(h.at(1), std::set<NodeId>{2});
  EXPECT_EQ(h.at(2), std::set<NodeId>{1});
}

TEST(HiddenSets, OutOfBsRangeIsNotHidden) {
  const Audibility a{100.0, 1000.0, {}};
  const auto h = hidden_sets({{1, {0, 0}}, {2, {1500, 0}}}, a);
  EXPECT_TRUE(h.at(1).empty());
}

TEST(HiddenSets, Symmetric) {
  Rng rng = make_rng(1, 0);
  std::uniform_real_distribution<double> c(-600, 600);
  const Audibility a{250.0, 800.0, {}};
  for (int t = 0; t < 50; ++t) {
    std::vector<NodeSite> nodes;
    for (NodeId i = 0; i < 20; ++i) nodes.push_back({i, {c(rng), c(rng)}});
    const auto h = hidden_sets(nodes, a);
    for (const auto& [u, hs] : h) {
      for (NodeId v : hs) EXPECT_TRUE(h.at(v).contains(u));
    }
  }
}

// --- allocation --------------------------------------------------------------

TEST(Allocate, HiddenPairSplit) {
  const auto a = allocate_subcarriers({{1, {-125, 0}}, {2, {125, 0}}}, small_plan(2),
                                      {100.0, 1000.0, {}});
  EXPECT_NE(a.of_node.at(1), a.of_node.at(2));
}

TEST(Allocate, AudibleNodesBalance) {
  std::vector<NodeSite> nodes;
  for (NodeId i = 0; i < 5; ++i) nodes.push_back({i, {double(i), 0}});
  const auto a = allocate_subcarriers(nodes, small_plan(2), {100.0, 1000.0, {}});
  EXPECT_EQ(a.occupancy({0}), 3u);
  EXPECT_EQ(a.occupancy({1}), 2u);
}

TEST(Allocate, SingleNodeGetsLowestIndex) {
  const auto a = allocate_subcarriers({{9, {0, 0}}}, ch_plan(), {});
  EXPECT_EQ(a.of_node.at(9), SubcarrierId{0});
}

TEST(Allocate, ReservedAndUnusableSkipped) {
  const auto plan = ch_plan().without({0});
  const auto a = allocate_subcarriers({{1, {0, 0}}, {2, {1, 0}}}, plan, {}, {{1}});
  EXPECT_EQ(a.of_node.at(1), SubcarrierId{2});
  EXPECT_EQ(a.of_node.at(2), SubcarrierId{3});
  EXPECT_TRUE(a.occupants[0].empty());
  EXPECT_THROW(allocate_subcarriers({{1, {0, 0}}}, small_plan(1), {}, {{0}}), Error);
}

TEST(Allocate, UniqueWhenCapacitySuffices) {
  Rng rng = make_rng(2, 0);
  std::uniform_real_distribution<double> c(-500, 500);
  for (int t = 0; t < 50; ++t) {
    std::vector<NodeSite> nodes;
    for (NodeId i = 0; i < 29; ++i) nodes.push_back({i, {c(rng), c(rng)}});
    const auto a = allocate_subcarriers(nodes, ch_plan(), {150.0, 1000.0, {}});
    for (const auto& occ : a.occupants) EXPECT_LE(occ.size(), 1u);
  }
}

TEST(Allocate, LoadBalanceSpread) {
  for (std::size_t k : {1u, 2u, 3u}) {
    std::vector<NodeSite> nodes;
    for (NodeId i = 0; i < 29 * k + 5; ++i) nodes.push_back({i, {0, 0}});
    const auto a = allocate_subcarriers(nodes, ch_plan(), {100.0, 1000.0, {}});
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& occ : a.occupants) {
      lo = std::min(lo, occ.size());
      hi = std::max(hi, occ.size());
    }
    EXPECT_LE(hi - lo, 1u);
  }
}

TEST(Allocate, SmallScaleAgainstBruteForce) {
  Rng rng = make_rng(3, 0);
  std::uniform_real_distribution<double> c(-300, 300);
  std::uniform_int_distribution<int> count(2, 6), subs(1, 3);
  int instances = 0, suboptimal = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = count(rng), s = subs(rng);
    std::vector<NodeSite> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(i), {c(rng), c(rng)}});
    const Audibility aud{200.0, 1000.0, {}};
    const auto plan = small_plan(static_cast<std::size_t>(s));
    const auto hidden = hidden_sets(nodes, aud);
    const auto greedy = allocate_subcarriers(nodes, plan, aud);
    std::size_t best = SIZE_MAX;
    std::vector<int> pick(static_cast<std::size_t>(n), 0);
    for (;;) {
      Assignment a(plan.size());
      for (int i = 0; i < n; ++i) a.assign(static_cast<NodeId>(i), {static_cast<std::size_t>(pick[i])});
      best = std::min(best, a.hidden_cohabitation(hidden));
      int i = 0;
      while (i < n && ++pick[i] == s) pick[i++] = 0;
      if (i == n) break;
    }
    const std::size_t g = greedy.hidden_cohabitation(hidden);
    EXPECT_GE(g, best);
    suboptimal += g > best;
    ++instances;
    if (n <= s) {
      for (const auto& occ : greedy.occupants) EXPECT_LE(occ.size(), 1u);
    }
  }
  RecordProperty("instances", instances);
  RecordProperty("order_dependent_gaps", suboptimal);
}

// --- CSMA/CA -----------------------------------------------------------------

TEST(Csma, ClearChannelOneDraw) {
  Rng rng = make_rng(4, 0);
  NodeRecord n;
  const BackoffConfig cfg;
  auto a = csma_step(n, MacInput::kWake, false, cfg, rng);
  EXPECT_EQ(a.kind, MacActionKind::kBackoff);
  EXPECT_LT(a.ticks, cfg.initial_window);
  a = csma_step(n, MacInput::kBackoffExpired, false, cfg, rng);
  EXPECT_EQ(a.kind, MacActionKind::kTransmit);
  EXPECT_EQ(n.backoff_draws, 1);
  EXPECT_EQ(n.attempts, 1);
  EXPECT_EQ(csma_step(n, MacInput::kTxDone, false, cfg, rng).kind, MacActionKind::kAwaitAck);
  EXPECT_EQ(csma_step(n, MacInput::kAckReceived, false, cfg, rng).kind, MacActionKind::kSleep);
  EXPECT_EQ(n.state, MacState::kSleep);
}

TEST(Csma, BusyThenClearTwoDraws) {
  Rng rng = make_rng(5, 0);
  NodeRecord n;
  const BackoffConfig cfg;
  csma_step(n, MacInput::kWake, false, cfg, rng);
  const auto a = csma_step(n, MacInput::kBackoffExpired, true, cfg, rng);
  EXPECT_EQ(a.kind, MacActionKind::kBackoff);
  EXPECT_LT(a.ticks, cfg.congestion_window);
  EXPECT_EQ(csma_step(n, MacInput::kBackoffExpired, false, cfg, rng).kind, MacActionKind::kTransmit);
  EXPECT_EQ(n.backoff_draws, 2);
}

TEST(Csma, TimeoutsRetryUntilCap) {
  Rng rng = make_rng(6, 0);
  NodeRecord n;
  BackoffConfig cfg;
  cfg.retry_cap = 3;
  csma_step(n, MacInput::kWake, false, cfg, rng);
  for (int attempt = 1; attempt <= 3; ++attempt) {
    ASSERT_EQ(csma_step(n, MacInput::kBackoffExpired, false, cfg, rng).kind, MacActionKind::kTransmit);
    csma_step(n, MacInput::kTxDone, false, cfg, rng);
    const auto a = csma_step(n, MacInput::kAckTimeout, false, cfg, rng);
    EXPECT_EQ(a.kind, attempt < 3 ? MacActionKind::kBackoff : MacActionKind::kDrop);
  }
  EXPECT_EQ(n.state, MacState::kSleep);
}

TEST(Csma, StaleInputsIgnored) {
  Rng rng = make_rng(7, 0);
  NodeRecord n;
  const BackoffConfig cfg;
  EXPECT_EQ(csma_step(n, MacInput::kAckTimeout, false, cfg, rng).kind, MacActionKind::kNone);
  EXPECT_EQ(csma_step(n, MacInput::kBackoffExpired, false, cfg, rng).kind, MacActionKind::kNone);
  csma_step(n, MacInput::kWake, false, cfg, rng);
  EXPECT_EQ(csma_step(n, MacInput::kWake, false, cfg, rng).kind, MacActionKind::kNone);
  EXPECT_EQ(csma_step(n, MacInput::kAckReceived, false, cfg, rng).kind, MacActionKind::kNone);
}

TEST(Csma, BackoffDrawsUniform) {
  Rng rng = make_rng(8, 0);
  const BackoffConfig cfg;
  std::vector<int> hist(static_cast<std::size_t>(cfg.initial_window), 0);
  constexpr int runs = 10000;
  for (int i = 0; i < runs; ++i) {
    NodeRecord n;
    ++hist.at(static_cast<std::size_t>(csma_step(n, MacInput::kWake, false, cfg, rng).ticks));
  }
  const double expected = static_cast<double>(runs) / static_cast<double>(hist.size());
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  // 31 degrees of freedom, upper 1% point.
  EXPECT_LT(chi2, 52.19);
}

TEST(Csma, ConfigValidation) {
  BackoffConfig cfg;
  cfg.initial_window = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.retry_cap = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

// --- ACKs --------------------------------------------------------------------

// Decodes a downlink burst with the uplink receiver chain.
std::vector<phy::DecodedFrame> decode_burst(const DownlinkBurst& burst, const SubcarrierPlan& plan) {
  phy::GfftReceiver rx(plan, 64);
  phy::DecodeMatrix m(plan.size(), 64);
  std::vector<phy::DecodedFrame> out;
  for (const auto& map : burst.ticks) {
    const auto buf = phy::bs_ofdm_encode(map, plan, 64, 1.0);
    for (auto& f : phy::decode_step(m, rx.tick(buf.samples), {})) out.push_back(f);
  }
  return out;
}

TEST(BsAckEncode, EmptyReceivedSet) {
  const auto plan = ch_plan();
  EXPECT_EQ(bs_ack_encode({}, AckMode::kPerSubcarrier, plan, {}).length(), 0u);
  const auto burst = bs_ack_encode({}, AckMode::kBitVector, plan, {{}, SubcarrierId{26}});
  const auto frames = decode_burst(burst, plan);
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(AckBitVector::unpack(frames[0].packet.payload, 29), AckBitVector(29));
}

TEST(BsAckEncode, BitVectorSetsReceivedBits) {
  const auto plan = ch_plan();
  const auto burst = bs_ack_encode({{3}, {7}}, AckMode::kBitVector, plan, {{}, SubcarrierId{26}});
  EXPECT_EQ(burst.length(), ack_frame_chips(AckMode::kBitVector, 29, 8));
  const auto frames = decode_burst(burst, plan);
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_TRUE(frames[0].crc_ok);
  EXPECT_EQ(frames[0].packet.subcarrier, SubcarrierId{26});
  EXPECT_EQ(frames[0].packet.src, kBaseStationAddress);
  const auto v = AckBitVector::unpack(frames[0].packet.payload, 29);
  for (std::size_t i = 0; i < 29; ++i) EXPECT_EQ(v.test({i}), i == 3 || i == 7) << i;
}

TEST(BsAckEncode, BitVectorDownlinkIsConstantEnvelope) {
  const auto plan = ch_plan();
  const auto burst = bs_ack_encode({{1}, {2}, {9}}, AckMode::kBitVector, plan, {{}, SubcarrierId{26}});
  for (const auto& map : burst.ticks) {
    EXPECT_NEAR(phy::compute_papr(phy::bs_ofdm_encode(map, plan, 64, 1.0)), 0.0, 1e-9);
  }
}

TEST(BsAckEncode, PerSubcarrierFramesOnEachAckedSubcarrier) {
  const auto plan = ch_plan();
  const auto frames = decode_burst(bs_ack_encode({{3}, {7}}, AckMode::kPerSubcarrier, plan, {}), plan);
  ASSERT_EQ(frames.size(), 2u);
  std::set<SubcarrierId> got;
  for (const auto& f : frames) {
    EXPECT_TRUE(f.crc_ok);
    EXPECT_TRUE(f.packet.payload.empty());
    got.insert(f.packet.subcarrier);
  }
  EXPECT_EQ(got, (std::set<SubcarrierId>{{3}, {7}}));
}

TEST(BsAckEncode, Errors) {
  const auto plan = ch_plan().without({5});
  EXPECT_THROW(bs_ack_encode({{3}}, AckMode::kBitVector, plan, {}), Error);
  EXPECT_THROW(bs_ack_encode({{5}}, AckMode::kPerSubcarrier, plan, {}), Error);
}

TEST(AckBitVector, PackRoundTrip) {
  AckBitVector v(29);
  v.set({0});
  v.set({8});
  v.set({28});
  const auto bytes = v.pack();
  ASSERT_EQ(bytes.size(), 4u);
  EXPECT_EQ(bytes[0], 0x80);
  EXPECT_EQ(bytes[1], 0x80);
  EXPECT_EQ(AckBitVector::unpack(bytes, 29), v);
  EXPECT_THROW(AckBitVector::unpack({0x00}, 29), Error);
}

TEST(PlanAcks, MixedSharedSubcarrierGetsDirectedAck) {
  const auto plan = plan_acks({{{4}, 1, true}, {{4}, 2, false}, {{6}, 3, true}}, 29);
  EXPECT_FALSE(plan.vector.test({4}));
  EXPECT_TRUE(plan.vector.test({6}));
  ASSERT_EQ(plan.directed.size(), 1u);
  EXPECT_EQ(plan.directed[0].node, 1u);
  EXPECT_EQ(directed_ack_wait(3, 2560), 3 * 2560);
}

// --- join and CFO feedback ---------------------------------------------------

struct JoinRig {
  SubcarrierPlan plan = ch_plan();
  phy::OfdmGeometry geo{plan, 64};
  BaseStationConfig cfg;

  JoinRig() {
    cfg.join = {28};
    cfg.downlink = SubcarrierId{26};
    cfg.reserved = {{27}, {28}, {26}};
    cfg.audibility = {100.0, 1000.0, {}};
    cfg.tick_rate_hz = geo.sample_rate_hz() / 64.0;
  }

  // Runs `chips` from a node with oscillator offset `cfo_hz` on subcarrier
  // `sc` through the sample-level channel and the G-FFT; returns bin values.
  std::vector<phy::TickOutput> air(const phy::Bits& chips, SubcarrierId sc, double cfo_hz) const {
    const auto x = phy::modulate_chips(chips, phy::ModulationKind::kBpsk, geo.center_offset_hz(sc),
                                       geo.sample_rate_hz(), 64);
    channel::LinkModel l;
    l.cfo_hz = cfo_hz;
    const auto y = channel::propagate({{{x, 0, l}}}, 1, x.size(), geo.sample_rate_hz());
    phy::GfftReceiver rx(plan, 64);
    std::vector<phy::TickOutput> out;
    for (std::size_t t = 0; t < chips.size(); ++t) out.push_back(rx.tick(std::span(y.samples).subspan(t * 64, 64)));
    return out;
  }

  JoinRequest request(NodeId id, Position p, double cfo_hz) const {
    const auto req_packet = phy::frame_packet({}, static_cast<std::uint8_t>(id), cfg.join);
    phy::Bits chips = phy::packet_chips(req_packet, 8);
    chips.resize(phy::kHeaderBits * 8);  // preamble and sync word
    const auto ticks = air(chips, cfg.join, cfo_hz);
    JoinRequest r{id, p, {}, phy::chip_symbols(chips, phy::ModulationKind::kBpsk)};
    for (const auto& t : ticks) r.rx_bins.push_back(t[cfg.join.index].value);
    return r;
  }

  // Sends a data packet with `cfo_hz` left on the air and decodes it.
  std::vector<phy::DecodedFrame> uplink(const phy::Packet& p, double cfo_hz) const {
    phy::DecodeMatrix m(plan.size(), 64);
    std::vector<phy::DecodedFrame> out;
    for (const auto& tick : air(phy::packet_chips(p, 8), p.subcarrier, cfo_hz)) {
      for (auto& f : phy::decode_step(m, tick, {})) out.push_back(f);
    }
    return out;
  }
};

TEST(HandleJoin, FirstJoinerFollowsAllocationAndScaledEstimate) {
  JoinRig rig;
  BaseStationMac bs(rig.plan, rig.cfg);
  const auto req = rig.request(1, {0, 0}, 1500.0);
  const auto reply = bs.handle_join(req, 0);
  EXPECT_EQ(reply.subcarrier, SubcarrierId{0});
  EXPECT_EQ(reply.downlink, SubcarrierId{26});
  const double f_join = static_cast<double>(rig.plan.center(rig.cfg.join));
  const auto est = estimation::estimate_cfo(req.rx_bins, req.known_symbols,
                                            {rig.cfg.tick_rate_hz, 1, f_join, 32});
  EXPECT_DOUBLE_EQ(reply.estimate.fine_hz, est.fine_hz);
  EXPECT_DOUBLE_EQ(reply.cfo_feedback_hz,
                   estimation::scale_cfo(est, f_join, static_cast<double>(rig.plan.center({0}))));
  EXPECT_NEAR(reply.estimate.fine_hz, 1500.0, 1e-6);
  EXPECT_EQ(reply.backups.size(), 2u);
  EXPECT_TRUE(bs.joined(1));
}

TEST(HandleJoin, CompensatedUplinkDecodesBitExact) {
  JoinRig rig;
  BaseStationMac bs(rig.plan, rig.cfg);
  const double ppm = 0.2 * 200e3 / (static_cast<double>(rig.plan.center(rig.cfg.join)) / 1e6);
  const double join_cfo = ppm * static_cast<double>(rig.plan.center(rig.cfg.join)) / 1e6;
  const auto reply = bs.handle_join(rig.request(1, {0, 0}, join_cfo), 0);
  const double node_cfo = ppm * static_cast<double>(rig.plan.center(reply.subcarrier)) / 1e6;

  std::vector<std::uint8_t> payload(28);
  std::iota(payload.begin(), payload.end(), 1);
  const auto p = phy::frame_packet(payload, 1, reply.subcarrier);
  const auto raw = rig.uplink(p, node_cfo);
  const bool raw_ok = raw.size() == 1 && raw[0].crc_ok && raw[0].packet == p;
  EXPECT_FALSE(raw_ok);
  const auto fixed = rig.uplink(p, node_cfo - reply.cfo_feedback_hz);
  ASSERT_EQ(fixed.size(), 1u);
  EXPECT_TRUE(fixed[0].crc_ok);
  EXPECT_EQ(fixed[0].packet, p);
}

TEST(HandleJoin, HiddenJoinersSplitAndEviction) {
  JoinRig rig;
  rig.cfg.inactivity_window = 1000;
  BaseStationMac bs(rig.plan, rig.cfg);
  const auto a = bs.handle_join({1, {-125, 0}, {}, {}}, 0);
  const auto b = bs.handle_join({2, {125, 0}, {}, {}}, 10);
  EXPECT_NE(a.subcarrier, b.subcarrier);
  EXPECT_EQ(a.cfo_feedback_hz, 0.0);
  bs.note_activity(2, 900);
  EXPECT_TRUE(bs.evict_inactive(1000).empty());
  EXPECT_EQ(bs.evict_inactive(1001), std::vector<NodeId>{1});
  EXPECT_FALSE(bs.joined(1));
  EXPECT_FALSE(bs.subcarrier_of(1));
  EXPECT_TRUE(bs.assignment().occupants[a.subcarrier.index].empty());
  EXPECT_TRUE(bs.joined(2));
}

TEST(HandleJoin, FullPoolSharesLeastOccupied) {
  JoinRig rig;
  BaseStationMac bs(rig.plan, rig.cfg);
  const std::size_t pool = bs.pool().size();
  EXPECT_EQ(pool, 26u);
  for (NodeId i = 0; i < pool + 3; ++i) bs.handle_join({i, {double(i), 0}, {}, {}}, 0);
  std::size_t hi = 0;
  for (auto sc : bs.pool()) hi = std::max(hi, bs.assignment().occupancy(sc));
  EXPECT_EQ(hi, 2u);
  for (SubcarrierId r : rig.cfg.reserved) EXPECT_TRUE(bs.assignment().occupants[r.index].empty());
}

TEST(BaseStationMac, RejectsUnusableJoin) {
  JoinRig rig;
  EXPECT_THROW(BaseStationMac(rig.plan.without({28}), rig.cfg), Error);
}

// --- relay -------------------------------------------------------------------

TEST(Relay, ViaBaseStationAtNextBeacon) {
  JoinRig rig;
  BaseStationMac bs(rig.plan, rig.cfg);
  bs.handle_join({1, {0, 0}, {}, {}}, 0);
  bs.handle_join({2, {1, 0}, {}, {}}, 0);
  const auto r = relay_peer_to_peer(bs, 1, 2, 2600, 1000, 2560);
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(r.downlink, *bs.subcarrier_of(2));
  EXPECT_EQ(r.delivery_tick, 3000 + 2560);
  // Uplink airtime + wait to beacon + downlink airtime, from a start at 40.
  EXPECT_EQ(r.delivery_tick - 40, 2560 + (3000 - 2600) + 2560);
  const auto lost = relay_peer_to_peer(bs, 1, 99, 0, 1000, 10);
  EXPECT_FALSE(lost.delivered);
  EXPECT_EQ(lost.reason, "unknown destination");
  EXPECT_EQ(next_beacon(3000, 1000), 3000);
  EXPECT_EQ(next_beacon(3001, 1000), 4000);
  EXPECT_THROW(next_beacon(1, 0), Error);
}

TEST(Relay, SameSubcarrierPeersStillUseBaseStation) {
  const auto plan = small_plan(3);
  BaseStationConfig cfg;
  cfg.join = {0};
  cfg.reserved = {{0}, {1}};
  BaseStationMac bs(plan, cfg);
  bs.handle_join({1, {0, 0}, {}, {}}, 0);
  bs.handle_join({2, {1, 0}, {}, {}}, 0);
  ASSERT_EQ(bs.subcarrier_of(1), bs.subcarrier_of(2));
  const auto r = relay_peer_to_peer(bs, 1, 2, 10, 100, 5);
  EXPECT_TRUE(r.delivered);
  EXPECT_EQ(r.delivery_tick, 105);
}

// --- health, TDMA, trace -----------------------------------------------------

TEST(SubcarrierHealth, BadSubcarrierShedsLoad) {
  Assignment a(4);
  a.assign(1, {0});
  a.assign(2, {0});
  a.assign(3, {1});
  SubcarrierHealth h(4, 4, 0.5);
  for (int i = 0; i < 4; ++i) {
    h.record({0}, i == 0);
    h.record({1}, true);
  }
  EXPECT_TRUE(h.bad({0}));
  EXPECT_FALSE(h.bad({1}));
  EXPECT_DOUBLE_EQ(h.failure_rate({0}), 0.75);
  const auto swaps = h.rebalance(a, {{0}, {1}, {2}, {3}});
  EXPECT_EQ(swaps.size(), 2u);
  EXPECT_TRUE(a.occupants[0].empty());
  EXPECT_EQ(a.occupancy({1}), 1u);
  EXPECT_THROW(SubcarrierHealth(4, 0, 0.5), Error);
}

TEST(Tdma, GroupRotation) {
  EXPECT_EQ(tdma_group_count(10, 29), 1u);
  EXPECT_EQ(tdma_group_count(60, 29), 3u);
  EXPECT_TRUE(tdma_active(0, 60, 29, 0));
  EXPECT_FALSE(tdma_active(30, 60, 29, 0));
  EXPECT_TRUE(tdma_active(30, 60, 29, 1));
  EXPECT_TRUE(tdma_active(59, 60, 29, 2));
  EXPECT_TRUE(tdma_active(0, 60, 29, 3));
  EXPECT_EQ(transmissions_per_packet(3), 3u);
  EXPECT_THROW(transmissions_per_packet(0), Error);
}

TEST(TraceLog, CsvSchema) {
  TraceLog log;
  log.add(5, 1, "tx_start", 3);
  log.add(9, -1, "beacon");
  EXPECT_EQ(log.csv(), "tick,node,event,subcarrier\n5,1,tx_start,3\n9,-1,beacon,-1\n");
  EXPECT_EQ(log.count("beacon"), 1u);
}

}  // namespace
}  // namespace snow::mac
