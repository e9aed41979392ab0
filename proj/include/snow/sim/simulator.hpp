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

#ifndef SNOW_SIM_SIMULATOR_HPP_
#define SNOW_SIM_SIMULATOR_HPP_

// Discrete-event network simulator. One tick is one chip period. Events are
// ordered by (tick, sequence number); all randomness comes from streams
// derived from the scenario seed, so equal configs give equal reports.
//
// In the full PHY mode every tick with signal on the air is synthesised as an
// m-sample window, passed through one G-FFT and the decode matrix; packet
// outcomes come from what the decoder actually produced. The abstract mode
// replaces that with collision detection plus a calibrated SNR -> chip-error
// table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "snow/atpc.hpp"
#include "snow/channel.hpp"
#include "snow/config.hpp"
#include "snow/estimation.hpp"
#include "snow/mac.hpp"
#include "snow/phy/decoder.hpp"
#include "snow/phy/framing.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"
#include "snow/rng.hpp"
#include "snow/sim/calibration.hpp"
#include "snow/sim/energy.hpp"
#include "snow/sim/mobility.hpp"
#include "snow/sop.hpp"
#include "yaml-cpp/yaml.h"

namespace snow::sim {

using Tick = std::int64_t;

enum class EventKind {
  kJoin,
  kArrival,
  kBackoffExpiry,
  kTxStart,
  kTxEnd,
  kAckArrive,
  kAckTimeout,
  kDownlinkFlush,
  kBeacon,
  kMobility,
  kTdmaRound,
};

struct Event {
  Tick tick = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kArrival;
  std::size_t subject = 0;  // node index
  std::uint64_t token = 0;

  bool operator>(const Event& o) const {
    return tick != o.tick ? tick > o.tick : seq > o.seq;
  }
};

struct NodeMetrics {
  mac::NodeId id = 0;
  std::int64_t subcarrier = -1;
  std::uint64_t generated = 0;
  std::uint64_t sent = 0;  // packets resolved (delivered or dropped)
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t tx_delivered = 0;
  std::uint64_t crc_failed = 0;
  std::uint64_t collided = 0;
  std::uint64_t relayed = 0;
  double prr = 0.0;
  double throughput_bps = 0.0;
  double mean_latency_s = 0.0;
  double mean_relay_latency_s = 0.0;
  double energy_mj = 0.0;
  double tx_power_dbm = 0.0;
  std::array<std::int64_t, 4> state_ticks{};
  double latency_sum_s = 0.0;        // helpers for aggregation
  double relay_latency_sum_s = 0.0;
};

struct SopSummary {
  std::string algorithm;
  std::size_t objective = 0;
  std::size_t bound = 0;
  bool feasible = false;
  sop::Allocation allocation;
  std::map<sop::TreeLink, int> tree_links;
  std::string tree_link_error;
};

struct MetricsReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string phy_mode;
  Tick horizon_ticks = 0;
  double tick_s = 0.0;
  std::size_t base_stations = 1;
  std::vector<NodeMetrics> nodes;
  NodeMetrics aggregate;
  std::uint64_t in_flight = 0;
  std::uint64_t fft_executions = 0;
  std::uint64_t phy_ticks = 0;
  std::optional<SopSummary> sop;
};

// The SNR -> chip-error table an abstract run uses: loaded from
// run.calibration_file when given, otherwise measured on the scenario's plan.
inline CalibrationTable scenario_calibration(const ScenarioConfig& cfg) {
  if (!cfg.run.calibration_file.empty()) {
    YAML::Node doc;
    try {
      doc = YAML::LoadFile(cfg.run.calibration_file);
    } catch (const YAML::Exception& e) {
      throw ConfigError("run.calibration_file", e.what());
    }
    return table_from_yaml(doc);
  }
  CalibrationOptions co;
  co.scheme = cfg.phy.scheme;
  co.fft_size = cfg.phy.fft_size;
  co.seed = derive_seed(cfg.run.seed, 0xCA1);
  return calibrate(cfg.plan(), co);
}

// One base station and its nodes.
class Network {
 public:
  Network(const ScenarioConfig& cfg, SubcarrierPlan plan, std::int64_t bs_trace_id = -1,
          std::optional<CalibrationTable> calibration = std::nullopt)
      : cfg_(cfg),
        plan_(std::move(plan)),
        bs_id_(bs_trace_id),
        scheme_(cfg.phy.scheme),
        r_(cfg.phy.scheme.spreading_factor),
        tick_s_(1.0 / cfg.run.chip_rate_hz),
        bs_rng_(make_rng(cfg.run.seed, 0xB5)),
        geo_(plan_, cfg.phy.fft_size),
        health_(plan_.size(), std::max<std::size_t>(1, cfg.mac.health_window),
                cfg.mac.health_threshold),
        calibration_(std::move(calibration)) {
    setup();
  }

  MetricsReport run() {
    const Tick horizon = cfg_.run.horizon_ticks;
    if (full_) {
      Tick t = 0;
      while (t < horizon) {
        process_events(t);
        if (!active_.empty() || !matrix_->all_idle()) {
          phy_tick(t);
          ++t;
        } else {
          t = events_.empty() ? horizon : std::max(t + 1, std::min(horizon, events_.top().tick));
        }
      }
    } else {
      while (!events_.empty() && events_.top().tick < horizon) process_events(events_.top().tick);
    }
    return finish();
  }

  const mac::TraceLog& trace() const { return trace_; }
  const mac::Assignment& assignment() const { return bs_->assignment(); }

  Tick packet_airtime(std::size_t payload) const {
    return static_cast<Tick>(phy::frame_bit_count(payload)) * r_;
  }
  Tick ack_airtime() const {
    return static_cast<Tick>(mac::ack_frame_chips(cfg_.mac.ack_mode, plan_.size(), r_));
  }
  Tick per_subcarrier_ack_airtime() const {
    return static_cast<Tick>(mac::ack_frame_chips(mac::AckMode::kPerSubcarrier, plan_.size(), r_));
  }

 private:
  struct Transmission {
    std::size_t node = 0;
    SubcarrierId sc{};
    Tick start = 0;
    Tick end = 0;
    phy::Packet packet;
    phy::Bits chips;
    double amplitude = 1.0;
    double cfo_hz = 0.0;
    bool overlapped = false;
    std::uint64_t serial = 0;
    bool last_copy = true;
  };

  struct NodeState {
    NodeConfig cfg;
    mac::NodeRecord rec;
    Rng rng;
    mac::Position pos;
    std::deque<Tick> queue;
    bool busy = false;  // serving a packet
    Tick arrival = 0;
    std::vector<std::uint8_t> payload;
    std::uint64_t serial = 0;
    bool serial_delivered = false;
    std::uint64_t token = 0;
    double ppm = 0.0;
    double cfo_feedback_ppm = 0.0;
    double doppler_hz = 0.0;
    double tx_power = 0.0;
    std::optional<atpc::PowerModel> power;
    std::vector<bool> window;
    mac::Position power_anchor;
    bool joined = false;
    bool traffic_started = false;
    EnergyLedger energy;
    NodeMetrics m;
    std::size_t group = 0;  // TDMA
  };

  struct DownlinkInterval {
    SubcarrierId sc;
    Tick start, end;
  };

  // --- setup -----------------------------------------------------------------

  void setup() {
    full_ = cfg_.run.phy_mode == PhyMode::kFull;
    reference_loss_ = cfg_.channel.reference_loss_db.value_or(channel::free_space_reference_db(
        0.5 * static_cast<double>(cfg_.spectrum.start_hz + cfg_.spectrum.end_hz)));

    mac::BaseStationConfig bc;
    const auto reserved = reserved_ids();
    bc.reserved = reserved;
    if (cfg_.mac.join_subcarrier && plan_.usable({*cfg_.mac.join_subcarrier})) {
      bc.join = {*cfg_.mac.join_subcarrier};
      has_join_ = true;
    } else {
      bc.join = plan_.usable_ids().front();
    }
    downlink_ = downlink_id();
    bc.downlink = downlink_;
    bc.audibility = {cfg_.mac.comm_range_m, cfg_.mac.bs_range_m, cfg_.bs_position};
    bc.tick_rate_hz = geo_.bin_spacing_hz();
    bc.backup_count = cfg_.mac.backup_count;
    bc.inactivity_window = cfg_.mac.inactivity_window_ticks;
    bs_.emplace(plan_, bc);
    if (cfg_.mac.ack_mode == mac::AckMode::kBitVector && !downlink_) {
      throw ConfigError("mac.downlink_subcarrier", "required for bit-vector ACKs");
    }

    if (full_) {
      rx_.emplace(plan_, cfg_.phy.fft_size, cfg_.phy.window);
      matrix_.emplace(plan_.size(), cfg_.phy.fft_size, cfg_.phy.sync_word);
      window_.assign(cfg_.phy.fft_size, cd{});
      tones_.resize(plan_.size());
      const double fs = geo_.sample_rate_hz();
      for (std::size_t k = 0; k < plan_.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * geo_.center_offset_hz({k}) / fs;
        tones_[k].resize(cfg_.phy.fft_size);
        for (std::size_t n = 0; n < cfg_.phy.fft_size; ++n) {
          tones_[k][n] = std::polar(1.0, w * static_cast<double>(n));
        }
      }
    } else if (!cfg_.channel.noiseless && !calibration_) {
      calibration_ = scenario_calibration(cfg_);
    }

    std::vector<std::size_t> order(cfg_.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cfg_.nodes[a].id < cfg_.nodes[b].id; });

    nodes_.resize(cfg_.nodes.size());
    for (std::size_t i = 0; i < cfg_.nodes.size(); ++i) {
      auto& n = nodes_[i];
      n.cfg = cfg_.nodes[i];
      n.rng = make_rng(cfg_.run.seed, 1000 + n.cfg.id);
      n.pos = n.cfg.position;
      n.power_anchor = n.pos;
      n.rec.id = n.cfg.id;
      n.rec.position = n.pos;
      n.tx_power = n.cfg.tx_power_dbm;
      n.ppm = n.cfg.cfo_ppm;
      if (n.ppm == 0.0 && cfg_.channel.cfo_ppm_max > 0.0) {
        std::uniform_real_distribution<double> d(-cfg_.channel.cfo_ppm_max, cfg_.channel.cfo_ppm_max);
        n.ppm = d(n.rng);
      }
      n.m.id = n.cfg.id;
    }

    join_airtime_ = static_cast<Tick>(phy::kHeaderBits) * r_;
    Tick traffic_base = 0;
    if (has_join_) {
      // Joins go one after another on the join subcarrier, in id order.
      Tick t = 0;
      for (std::size_t i : order) {
        push(t, EventKind::kJoin, i);
        t += join_airtime_ + 2;
      }
    } else {
      assign_without_join(order);
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i].joined = true;
        start_traffic(i, traffic_base);
      }
    }

    if (cfg_.mac.mode == MacMode::kTdma) setup_tdma(order);

    bool need_beacons = cfg_.mac.inactivity_window_ticks > 0 || cfg_.mac.health_window > 0;
    for (const auto& n : cfg_.nodes) need_beacons |= n.traffic.destination.has_value();
    if (need_beacons) push(cfg_.mac.beacon_period_ticks, EventKind::kBeacon, 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].cfg.speed_mps > 0) push(kMobilityPeriod, EventKind::kMobility, i);
    }
  }

  std::set<SubcarrierId> reserved_ids() const {
    std::set<SubcarrierId> r;
    for (auto id : cfg_.reserved()) {
      if (plan_.contains(id)) r.insert(id);
    }
    return r;
  }

  std::optional<SubcarrierId> downlink_id() const {
    if (cfg_.mac.downlink_subcarrier && plan_.usable({*cfg_.mac.downlink_subcarrier})) {
      return SubcarrierId{*cfg_.mac.downlink_subcarrier};
    }
    if (cfg_.mac.ack_mode == mac::AckMode::kBitVector) {
      // Multi-BS runs: fall back to the highest usable subcarrier.
      const auto ids = plan_.usable_ids();
      if (ids.size() > 1) return ids.back();
    }
    return std::nullopt;
  }

  std::vector<SubcarrierId> pool() const {
    auto r = reserved_ids();
    if (downlink_) r.insert(*downlink_);
    return mac::uplink_pool(plan_, r);
  }

  void assign_without_join(const std::vector<std::size_t>& order) {
    const auto p = pool();
    if (p.empty()) throw Error("no usable uplink subcarriers");
    std::vector<mac::NodeSite> sites;
    for (std::size_t i : order) sites.push_back({nodes_[i].cfg.id, nodes_[i].pos});
    mac::Assignment a(plan_.size());
    if (cfg_.mac.allocation == AllocationRule::kLocationAware) {
      std::set<SubcarrierId> r = reserved_ids();
      if (downlink_) r.insert(*downlink_);
      a = mac::allocate_subcarriers(sites, plan_, {cfg_.mac.comm_range_m, cfg_.mac.bs_range_m,
                                                   cfg_.bs_position}, r);
    } else {
      for (const auto& s : sites) a.assign(s.id, p.front());
    }
    for (std::size_t i : order) {
      auto& n = nodes_[i];
      n.rec.assigned = n.cfg.subcarrier ? SubcarrierId{*n.cfg.subcarrier} : a.of_node.at(n.cfg.id);
      n.cfo_feedback_ppm = 0.0;  // nothing to estimate from without a join exchange
      admit(i, 0);
    }
  }

  // Registers the node's (possibly pinned) subcarrier with the BS bookkeeping.
  void admit(std::size_t i, Tick now) {
    auto& n = nodes_[i];
    mac::JoinRequest req{n.cfg.id, n.pos, {}, {}};
    bs_->handle_join(req, now);
    bs_assign_override(n.cfg.id, n.rec.assigned);
    n.m.subcarrier = static_cast<std::int64_t>(n.rec.assigned.index);
    trace(now, n.cfg.id, "join", n.rec.assigned);
    if (cfg_.atpc.enabled) init_power(i);
  }

  void bs_assign_override(mac::NodeId id, SubcarrierId sc) { overrides_[id] = sc; }

  void start_traffic(std::size_t i, Tick base) {
    auto& n = nodes_[i];
    n.traffic_started = true;
    const auto& t = n.cfg.traffic;
    if (t.kind == TrafficKind::kSaturated) {
      push(base + t.start_ticks, EventKind::kArrival, i);
    } else {
      push(base + t.start_ticks + interval(n), EventKind::kArrival, i);
    }
  }

  Tick interval(NodeState& n) {
    const auto& t = n.cfg.traffic;
    switch (t.kind) {
      case TrafficKind::kPeriodic: return t.period_ticks;
      case TrafficKind::kUniform: {
        std::uniform_int_distribution<Tick> d(t.min_ticks, t.max_ticks);
        return d(n.rng);
      }
      case TrafficKind::kSaturated: return 0;
    }
    return 0;
  }

  // --- event plumbing ---------------------------------------------------------

  // State changes dated past the horizon are dropped so every ledger closes
  // at exactly the horizon.
  void set_state(NodeState& n, RadioState s, Tick t) {
    if (t <= cfg_.run.horizon_ticks) n.energy.set(s, t);
  }

  void push(Tick t, EventKind k, std::size_t subject, std::uint64_t token = 0) {
    events_.push({t, seq_++, k, subject, token});
  }

  void trace(Tick t, std::int64_t node, const char* what, std::optional<SubcarrierId> sc = {}) {
    if (!cfg_.run.trace && !force_trace_) return;
    trace_.add(t, node, what, sc ? static_cast<std::int64_t>(sc->index) : -1);
  }

  void process_events(Tick now) {
    while (!events_.empty() && events_.top().tick == now) {
      const Event e = events_.top();
      events_.pop();
      handle(e);
    }
  }

  void handle(const Event& e) {
    switch (e.kind) {
      case EventKind::kJoin: on_join(e); break;
      case EventKind::kArrival: on_arrival(e); break;
      case EventKind::kBackoffExpiry: on_backoff_expiry(e); break;
      case EventKind::kTxStart: on_tx_start(e); break;
      case EventKind::kTxEnd: on_tx_end(e); break;
      case EventKind::kAckArrive: on_ack(e); break;
      case EventKind::kAckTimeout: on_ack_timeout(e); break;
      case EventKind::kDownlinkFlush: on_downlink_flush(e.tick); break;
      case EventKind::kBeacon: on_beacon(e.tick); break;
      case EventKind::kMobility: on_mobility(e); break;
      case EventKind::kTdmaRound: on_tdma_round(e); break;
    }
  }

  // --- join -------------------------------------------------------------------

  void on_join(const Event& e) {
    auto& n = nodes_[e.subject];
    const Tick now = e.tick;
    set_state(n, RadioState::kTx, now);
    mac::JoinRequest req{n.cfg.id, n.pos, {}, {}};
    const double f_join = static_cast<double>(plan_.center({*cfg_.mac.join_subcarrier}));
    if (full_) {
      // The join subcarrier is kept ICI-free, so the node's preamble can be
      // observed on its own through the G-FFT.
      const phy::Packet p = phy::frame_packet({}, static_cast<std::uint8_t>(n.cfg.id),
                                              {*cfg_.mac.join_subcarrier}, cfg_.phy.sync_word);
      phy::Bits chips = phy::packet_chips(p, r_);
      chips.resize(static_cast<std::size_t>(join_airtime_));
      phy::GfftReceiver rx(plan_, cfg_.phy.fft_size, cfg_.phy.window);
      const double cfo = n.ppm * f_join / 1e6;
      const double amp = amplitude(n);
      Rng noise = make_rng(cfg_.run.seed, 0x10000 + n.cfg.id);
      std::vector<cd> w(cfg_.phy.fft_size);
      for (std::size_t t = 0; t < chips.size(); ++t) {
        const cd sym = phy::chip_symbol(chips[t], scheme_.kind) * amp;
        fill_tone(w, *cfg_.mac.join_subcarrier, sym, cfo, t, true);
        if (!cfg_.channel.noiseless) channel::add_awgn(w, 1.0, noise);
        req.rx_bins.push_back(rx.tick(w)[*cfg_.mac.join_subcarrier].value);
        req.known_symbols.push_back(phy::chip_symbol(chips[t], scheme_.kind));
      }
      join_fft_ += rx.transforms();
    }
    const auto reply = bs_->handle_join(req, now);
    n.rec.assigned = n.cfg.subcarrier ? SubcarrierId{*n.cfg.subcarrier} : reply.subcarrier;
    if (cfg_.mac.allocation == AllocationRule::kShared && !n.cfg.subcarrier) {
      n.rec.assigned = pool().front();
    }
    n.rec.backup = reply.backups;
    bs_assign_override(n.cfg.id, n.rec.assigned);
    const double f_assigned = static_cast<double>(plan_.center(n.rec.assigned));
    if (cfg_.mac.cfo_feedback) {
      n.cfo_feedback_ppm = full_ ? 1e6 * reply.cfo_feedback_hz / f_assigned : n.ppm;
    }
    n.m.subcarrier = static_cast<std::int64_t>(n.rec.assigned.index);
    n.joined = true;
    trace(now, n.cfg.id, "join", n.rec.assigned);
    set_state(n, RadioState::kSleep, now + join_airtime_);
    if (cfg_.atpc.enabled) init_power(e.subject);
    if (cfg_.mac.mode == MacMode::kCsma) start_traffic(e.subject, now + join_airtime_);
  }

  // --- traffic & CSMA ------------------------------------------------------

  bool more_packets(const NodeState& n) const {
    return n.cfg.traffic.packets == 0 || n.m.generated < n.cfg.traffic.packets;
  }

  void on_arrival(const Event& e) {
    auto& n = nodes_[e.subject];
    if (!more_packets(n)) return;
    ++n.m.generated;
    n.queue.push_back(e.tick);
    trace(e.tick, n.cfg.id, "arrival", n.rec.assigned);
    if (n.cfg.traffic.kind != TrafficKind::kSaturated && more_packets(n)) {
      push(e.tick + std::max<Tick>(1, interval(n)), EventKind::kArrival, e.subject);
    }
    if (!n.busy && cfg_.mac.mode == MacMode::kCsma) start_service(e.subject, e.tick);
  }

  void start_service(std::size_t i, Tick now) {
    auto& n = nodes_[i];
    if (n.busy) return;
    if (n.queue.empty()) {
      if (n.cfg.traffic.kind != TrafficKind::kSaturated || !more_packets(n)) return;
      ++n.m.generated;
      n.queue.push_back(now);
    }
    n.busy = true;
    n.arrival = n.queue.front();
    n.queue.pop_front();
    n.payload.resize(n.cfg.traffic.payload_bytes);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : n.payload) b = static_cast<std::uint8_t>(byte(n.rng));
    ++n.serial;
    n.serial_delivered = false;
    const auto a = mac::csma_step(n.rec, mac::MacInput::kWake, false, cfg_.mac.backoff, n.rng);
    set_state(n, RadioState::kIdle, now);
    trace(now, n.cfg.id, "backoff", n.rec.assigned);
    push(now + a.ticks, EventKind::kBackoffExpiry, i, ++n.token);
  }

  bool carrier_busy(const NodeState& n, Tick now) const {
    const SubcarrierId sc = n.rec.assigned;
    for (std::size_t k : active_) {
      const auto& tx = txs_[k];
      if (tx.sc != sc || tx.node == index_of(n)) continue;
      if (distance(nodes_[tx.node].pos, n.pos) <= cfg_.mac.comm_range_m) return true;
    }
    if (mac::distance(n.pos, cfg_.bs_position) <= cfg_.mac.bs_range_m) {
      for (const auto& d : downlink_tx_) {
        if (d.sc == sc && d.start <= now && now < d.end) return true;
      }
    }
    return false;
  }

  std::size_t index_of(const NodeState& n) const {
    return static_cast<std::size_t>(&n - nodes_.data());
  }

  void on_backoff_expiry(const Event& e) {
    auto& n = nodes_[e.subject];
    if (e.token != n.token) return;
    const Tick now = e.tick;
    const bool busy = carrier_busy(n, now);
    set_state(n, RadioState::kRx, now);  // one CCA tick
    trace(now, n.cfg.id, busy ? "cca_busy" : "cca_clear", n.rec.assigned);
    const auto a = mac::csma_step(n.rec, mac::MacInput::kBackoffExpired, busy, cfg_.mac.backoff, n.rng);
    if (a.kind == mac::MacActionKind::kBackoff) {
      set_state(n, RadioState::kIdle, now + 1);
      trace(now, n.cfg.id, "backoff", n.rec.assigned);
      push(now + 1 + a.ticks, EventKind::kBackoffExpiry, e.subject, ++n.token);
    } else if (a.kind == mac::MacActionKind::kTransmit) {
      push(now + 1, EventKind::kTxStart, e.subject, ++n.token);
    }
  }

  double link_snr_db(const NodeState& n) const {
    const double d = std::max(1.0, mac::distance(n.pos, cfg_.bs_position));
    channel::LinkModel lm;
    lm.path_loss_exponent = cfg_.channel.path_loss_exponent;
    lm.reference_loss_db = reference_loss_;
    return n.tx_power - channel::path_loss_db(d, lm) - cfg_.channel.noise_floor_dbm;
  }

  double amplitude(const NodeState& n) const {
    if (cfg_.channel.noiseless) return 1.0;
    return std::sqrt(std::pow(10.0, link_snr_db(n) / 10.0));
  }

  void on_tx_start(const Event& e) {
    auto& n = nodes_[e.subject];
    if (e.token == kCopyToken) {
      auto it = std::find_if(pending_copies_.begin(), pending_copies_.end(), [&](const Copy& c) {
        return c.node == e.subject && c.at == e.tick;
      });
      if (it == pending_copies_.end()) return;
      const bool last = it->last;
      pending_copies_.erase(it);
      begin_tx(e.subject, e.tick, last);
      return;
    }
    if (e.token != n.token) return;
    begin_tx(e.subject, e.tick, true);
  }

  void begin_tx(std::size_t i, Tick now, bool last_copy) {
    auto& n = nodes_[i];
    Transmission tx;
    tx.node = i;
    tx.sc = n.rec.assigned;
    tx.start = now;
    tx.packet = phy::frame_packet(n.payload, static_cast<std::uint8_t>(n.cfg.id), tx.sc,
                                  cfg_.phy.sync_word);
    tx.end = now + packet_airtime(n.payload.size());
    tx.amplitude = amplitude(n);
    const double f = static_cast<double>(plan_.center(tx.sc));
    tx.cfo_hz = (n.ppm - n.cfo_feedback_ppm) * f / 1e6;
    // A node with feedback enabled also pre-compensates its own Doppler.
    if (!cfg_.mac.cfo_feedback) tx.cfo_hz += n.doppler_hz;
    tx.serial = n.serial;
    tx.last_copy = last_copy;
    if (full_) tx.chips = phy::packet_chips(tx.packet, r_);
    for (std::size_t k : active_) {
      if (txs_[k].sc == tx.sc) {
        txs_[k].overlapped = true;
        tx.overlapped = true;
      }
    }
    txs_.push_back(std::move(tx));
    active_.push_back(txs_.size() - 1);
    ++n.m.transmissions;
    set_state(n, RadioState::kTx, now);
    trace(now, n.cfg.id, "tx_start", n.rec.assigned);
    push(txs_.back().end, EventKind::kTxEnd, i, txs_.size() - 1);
  }

  // --- PHY ---------------------------------------------------------------------

  void fill_tone(std::vector<cd>& w, std::size_t sc, cd sym, double cfo_hz, std::size_t tick_offset,
                 bool clear) {
    const std::size_t m = w.size();
    if (clear) std::fill(w.begin(), w.end(), cd{});
    if (sym == cd{}) return;
    const auto& tone = tones_.empty() ? make_tone(sc) : tones_[sc];
    if (cfo_hz == 0.0) {
      for (std::size_t k = 0; k < m; ++k) w[k] += sym * tone[k];
      return;
    }
    const double fs = geo_.sample_rate_hz();
    const double step = 2.0 * std::numbers::pi * cfo_hz / fs;
    const double base = step * static_cast<double>(tick_offset * m);
    for (std::size_t k = 0; k < m; ++k) {
      w[k] += sym * tone[k] * std::polar(1.0, base + step * static_cast<double>(k));
    }
  }

  const std::vector<cd>& make_tone(std::size_t sc) {
    scratch_tone_.resize(cfg_.phy.fft_size);
    const double w = 2.0 * std::numbers::pi * geo_.center_offset_hz({sc}) / geo_.sample_rate_hz();
    for (std::size_t n = 0; n < scratch_tone_.size(); ++n) {
      scratch_tone_[n] = std::polar(1.0, w * static_cast<double>(n));
    }
    return scratch_tone_;
  }

  void phy_tick(Tick t) {
    std::fill(window_.begin(), window_.end(), cd{});
    for (std::size_t k : active_) {
      const auto& tx = txs_[k];
      const auto off = static_cast<std::size_t>(t - tx.start);
      const cd sym = phy::chip_symbol(tx.chips[off], scheme_.kind) * tx.amplitude;
      fill_tone(window_, tx.sc.index, sym, tx.cfo_hz, off, false);
    }
    if (!cfg_.channel.noiseless) channel::add_awgn(window_, 1.0, bs_rng_);
    const auto out = rx_->tick(window_);
    ++phy_ticks_;
    for (auto& f : phy::decode_step(*matrix_, out, scheme_)) {
      decoded_[f.packet.subcarrier.index] = {t, std::move(f)};
    }
  }

  // --- reception & ACKs -----------------------------------------------------

  enum class Outcome { kDelivered, kCrcFailed, kCollided };

  Outcome resolve(const Transmission& tx, Tick now) {
    if (full_) {
      auto it = decoded_.find(tx.sc.index);
      if (it != decoded_.end() && it->second.first == now - 1) {
        const auto& f = it->second.second;
        if (f.crc_ok && f.packet.payload == tx.packet.payload && f.packet.src == tx.packet.src) {
          return Outcome::kDelivered;
        }
      }
      return tx.overlapped ? Outcome::kCollided : Outcome::kCrcFailed;
    }
    if (tx.overlapped) return Outcome::kCollided;
    if (cfg_.channel.noiseless) return Outcome::kDelivered;
    const std::size_t bits = tx.chips.empty() ? phy::frame_bit_count(tx.packet.payload.size())
                                              : tx.chips.size() / static_cast<std::size_t>(r_);
    const double pe = calibration_->packet_error_at(link_snr_db(nodes_[tx.node]), r_, bits);
    std::bernoulli_distribution fail(std::clamp(pe, 0.0, 1.0));
    return fail(bs_rng_) ? Outcome::kCrcFailed : Outcome::kDelivered;
  }

  void on_tx_end(const Event& e) {
    const Tick now = e.tick;
    const std::size_t k = e.token;
    active_.erase(std::find(active_.begin(), active_.end(), k));
    const Transmission& tx = txs_[k];
    auto& n = nodes_[tx.node];
    trace(now, n.cfg.id, "tx_end", tx.sc);

    const Outcome o = resolve(tx, now);
    const bool valid = o == Outcome::kDelivered;
    if (cfg_.mac.health_window > 0) health_.record(tx.sc, valid);
    switch (o) {
      case Outcome::kDelivered:
        ++n.m.tx_delivered;
        trace(now, n.cfg.id, "delivered", tx.sc);
        if (!n.serial_delivered && tx.serial == n.serial) {
          n.serial_delivered = true;
          n.m.latency_sum_s += static_cast<double>(now - n.arrival) * tick_s_;
          if (n.cfg.traffic.destination) relay(tx.node, now);
        }
        if (!bs_->joined(n.cfg.id)) {
          bs_->handle_join({n.cfg.id, n.pos, {}, {}}, now);
          trace(now, bs_id_, "rejoin", tx.sc);
        }
        bs_->note_activity(n.cfg.id, now);
        break;
      case Outcome::kCrcFailed:
        ++n.m.crc_failed;
        trace(now, n.cfg.id, "crc_failed", tx.sc);
        break;
      case Outcome::kCollided:
        ++n.m.collided;
        trace(now, n.cfg.id, "collided", tx.sc);
        break;
    }
    if (cfg_.atpc.enabled) atpc_observe(tx.node, valid, now);

    const bool tdma = cfg_.mac.mode == MacMode::kTdma;
    if (tx.last_copy) {
      if (!tdma) mac::csma_step(n.rec, mac::MacInput::kTxDone, false, cfg_.mac.backoff, n.rng);
      n.rec.state = mac::MacState::kAwaitAck;
      set_state(n, RadioState::kRx, now);
      const Tick timeout = cfg_.mac.ack_mode == mac::AckMode::kBitVector
                               ? 2 * ack_airtime() + 2
                               : per_subcarrier_ack_airtime() + 2;
      push(now + timeout, EventKind::kAckTimeout, tx.node, n.token);
    }

    if (cfg_.mac.ack_mode == mac::AckMode::kPerSubcarrier) {
      if (valid) send_directed_ack(tx.node, tx.sc, now);
    } else {
      pending_.push_back({tx.sc, n.cfg.id, valid});
      pending_nodes_.push_back(tx.node);
      push(now, EventKind::kDownlinkFlush, 0);
    }
  }

  void send_directed_ack(std::size_t node, SubcarrierId sc, Tick now) {
    const Tick a = per_subcarrier_ack_airtime();
    downlink_tx_.push_back({sc, now, now + a});
    trace(now, bs_id_, "ack_tx_start", sc);
    push(now + a, EventKind::kAckArrive, node, nodes_[node].token);
  }

  void on_downlink_flush(Tick now) {
    if (pending_.empty() || downlink_busy_until_ > now) return;
    const auto plan = mac::plan_acks(pending_, plan_.size());
    const Tick a = ack_airtime();
    downlink_tx_.push_back({*downlink_, now, now + a});
    trace(now, bs_id_, "ack_tx_start", *downlink_);
    for (std::size_t k = 0; k < pending_.size(); ++k) {
      if (pending_[k].valid && plan.vector.test(pending_[k].subcarrier)) {
        push(now + a, EventKind::kAckArrive, pending_nodes_[k], nodes_[pending_nodes_[k]].token);
      }
    }
    for (const auto& d : plan.directed) {
      for (std::size_t k = 0; k < pending_.size(); ++k) {
        if (pending_[k].node == d.node && pending_[k].valid) send_directed_ack(pending_nodes_[k], d.subcarrier, now);
      }
    }
    pending_.clear();
    pending_nodes_.clear();
    downlink_busy_until_ = now + a;
    push(now + a, EventKind::kDownlinkFlush, 0);
  }

  void on_ack(const Event& e) {
    auto& n = nodes_[e.subject];
    trace(e.tick, bs_id_, "ack_tx_end", n.rec.assigned);
    if (e.token != n.token || n.rec.state != mac::MacState::kAwaitAck) return;
    trace(e.tick, n.cfg.id, "ack_rx", n.rec.assigned);
    n.rec.state = mac::MacState::kSleep;
    n.rec.attempts = 0;
    ++n.token;
    ++n.m.sent;
    if (n.serial_delivered) ++n.m.delivered;
    n.busy = false;
    set_state(n, RadioState::kSleep, e.tick);
    if (cfg_.mac.mode == MacMode::kCsma) start_service(e.subject, e.tick);
  }

  void on_ack_timeout(const Event& e) {
    auto& n = nodes_[e.subject];
    if (e.token != n.token || n.rec.state != mac::MacState::kAwaitAck) return;
    const Tick now = e.tick;
    trace(now, n.cfg.id, "ack_timeout", n.rec.assigned);
    if (cfg_.mac.mode == MacMode::kTdma) {
      n.rec.state = mac::MacState::kSleep;
      set_state(n, RadioState::kSleep, now);
      ++n.token;
      if (n.rec.attempts >= cfg_.mac.backoff.retry_cap) drop(e.subject, now);
      return;
    }
    const auto a = mac::csma_step(n.rec, mac::MacInput::kAckTimeout, false, cfg_.mac.backoff, n.rng);
    if (a.kind == mac::MacActionKind::kDrop) {
      drop(e.subject, now);
      start_service(e.subject, now);
    } else {
      set_state(n, RadioState::kIdle, now);
      trace(now, n.cfg.id, "backoff", n.rec.assigned);
      push(now + a.ticks, EventKind::kBackoffExpiry, e.subject, ++n.token);
    }
  }

  void drop(std::size_t i, Tick now) {
    auto& n = nodes_[i];
    trace(now, n.cfg.id, "drop", n.rec.assigned);
    ++n.m.sent;
    if (n.serial_delivered) {
      ++n.m.delivered;  // reached the BS, only the ACK went missing
    } else {
      ++n.m.dropped;
    }
    n.rec.state = mac::MacState::kSleep;
    n.rec.attempts = 0;
    n.busy = false;
    ++n.token;
    set_state(n, RadioState::kSleep, now);
  }

  // --- peer-to-peer, beacons, health ---------------------------------------

  void relay(std::size_t src, Tick now) {
    const auto& n = nodes_[src];
    const auto out = mac::relay_peer_to_peer(*bs_, n.cfg.id, *n.cfg.traffic.destination, now,
                                             cfg_.mac.beacon_period_ticks,
                                             packet_airtime(n.payload.size()));
    if (!out.delivered) {
      trace(now, bs_id_, "relay_drop", n.rec.assigned);
      return;
    }
    relays_.push_back({src, now, out.delivery_tick, out.downlink});
  }

  void on_beacon(Tick now) {
    trace(now, bs_id_, "beacon");
    for (auto it = relays_.begin(); it != relays_.end();) {
      if (it->delivery - packet_airtime(nodes_[it->src].cfg.traffic.payload_bytes) <= now) {
        auto& s = nodes_[it->src];
        ++s.m.relayed;
        s.m.relay_latency_sum_s += static_cast<double>(it->delivery - it->decoded) * tick_s_;
        trace(it->delivery, bs_id_, "relay", it->downlink);
        it = relays_.erase(it);
      } else {
        ++it;
      }
    }
    for (mac::NodeId id : bs_->evict_inactive(now)) trace(now, static_cast<std::int64_t>(id), "evict");
    if (cfg_.mac.health_window > 0) {
      auto a = bs_->assignment();
      mac::Assignment mine(plan_.size());
      for (const auto& n : nodes_) mine.assign(n.cfg.id, n.rec.assigned);
      for (const auto& s : health_.rebalance(mine, pool())) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
          if (nodes_[i].cfg.id != s.node) continue;
          nodes_[i].rec.assigned = s.to;
          nodes_[i].m.subcarrier = static_cast<std::int64_t>(s.to.index);
          trace(now, s.node, "swap", s.to);
          if (cfg_.atpc.enabled) atpc_trigger(i, now, true);
        }
      }
    }
    push(now + cfg_.mac.beacon_period_ticks, EventKind::kBeacon, 0);
  }

  // --- mobility --------------------------------------------------------------

  static constexpr Tick kMobilityPeriod = 40'000;  // 100 ms at 400 kchip/s

  void on_mobility(const Event& e) {
    auto& n = nodes_[e.subject];
    const auto step = mobility_step(n.pos, n.cfg.speed_mps, n.cfg.heading_deg * std::numbers::pi / 180.0,
                                    static_cast<double>(kMobilityPeriod) * tick_s_, cfg_.bs_position);
    n.pos = step.position;
    n.rec.position = n.pos;
    n.doppler_hz = channel::doppler_shift_hz(static_cast<double>(plan_.center(n.rec.assigned)),
                                             step.speed_mps, step.theta_rad);
    trace(e.tick, n.cfg.id, "move", n.rec.assigned);
    if (cfg_.atpc.enabled && mac::distance(n.pos, n.power_anchor) > cfg_.atpc.displacement_m) {
      atpc_trigger(e.subject, e.tick, false);
    }
    push(e.tick + kMobilityPeriod, EventKind::kMobility, e.subject);
  }

  // --- ATPC -------------------------------------------------------------------

  double expected_pdr(const NodeState& n, double power) {
    if (cfg_.channel.noiseless || !calibration_) return 100.0;
    NodeState probe = n;
    probe.tx_power = power;
    const double pe = calibration_->packet_error_at(
        link_snr_db(probe), r_, phy::frame_bit_count(n.cfg.traffic.payload_bytes));
    return 100.0 * (1.0 - pe);
  }

  void init_power(std::size_t i) {
    auto& n = nodes_[i];
    std::vector<double> tp, pdr;
    for (double level : cfg_.atpc.tp_levels) {
      std::binomial_distribution<std::size_t> ok(cfg_.atpc.probe_packets,
                                                 std::clamp(expected_pdr(n, level) / 100.0, 0.0, 1.0));
      tp.push_back(level);
      pdr.push_back(100.0 * static_cast<double>(ok(n.rng)) /
                    static_cast<double>(cfg_.atpc.probe_packets));
    }
    try {
      n.power = atpc::fit_initial(tp, pdr, cfg_.atpc.tp_levels, cfg_.atpc.pdr_threshold);
    } catch (const Error&) {
      // Flat PDR across all levels: nothing to learn, keep the highest level.
      n.power = atpc::PowerModel{0.0, 100.0, cfg_.atpc.tp_levels, cfg_.atpc.pdr_threshold, true};
    }
    n.tx_power = atpc::select_power(*n.power);
    n.power_anchor = n.pos;
  }

  void atpc_observe(std::size_t i, bool ok, Tick now) {
    auto& n = nodes_[i];
    n.window.push_back(ok);
    if (n.window.size() < cfg_.atpc.window_packets) return;
    const double pdr = 100.0 * static_cast<double>(std::count(n.window.begin(), n.window.end(), true)) /
                       static_cast<double>(n.window.size());
    n.window.clear();
    if (atpc::should_update({cfg_.atpc.displacement_m, cfg_.atpc.pdr_margin}, *n.power, false,
                            mac::distance(n.pos, n.power_anchor), pdr)) {
      const double reading[] = {pdr};
      n.power = atpc::update_model(*n.power, reading);
      n.tx_power = atpc::select_power(*n.power);
      n.power_anchor = n.pos;
      trace(now, n.cfg.id, "power", n.rec.assigned);
    }
  }

  void atpc_trigger(std::size_t i, Tick now, bool reassigned) {
    auto& n = nodes_[i];
    (void)reassigned;
    init_power(i);
    trace(now, n.cfg.id, "power", n.rec.assigned);
  }

  // --- legacy TDMA ------------------------------------------------------------

  void setup_tdma(const std::vector<std::size_t>& order) {
    const auto p = pool();
    groups_ = mac::tdma_group_count(order.size(), p.size());
    int gamma = 1;
    for (const auto& n : nodes_) gamma = std::max(gamma, n.cfg.gamma);
    Tick payload_air = 0;
    for (const auto& n : nodes_) payload_air = std::max(payload_air, packet_airtime(n.cfg.traffic.payload_bytes));
    round_ = gamma * payload_air + 2 * ack_airtime() + 4;
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto& n = nodes_[order[k]];
      n.group = k / p.size();
      if (!n.cfg.subcarrier) n.rec.assigned = p[k % p.size()];
      n.m.subcarrier = static_cast<std::int64_t>(n.rec.assigned.index);
    }
    tdma_start_ = has_join_ ? static_cast<Tick>(order.size()) * (join_airtime_ + 2) : 0;
    for (std::size_t i : order) {
      if (!nodes_[i].traffic_started) start_traffic(i, tdma_start_);
    }
    push(tdma_start_, EventKind::kTdmaRound, 0);
  }

  void on_tdma_round(const Event& e) {
    const Tick now = e.tick;
    const std::uint64_t r = static_cast<std::uint64_t>((now - tdma_start_) / round_);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto& n = nodes_[i];
      if (n.group != r % groups_ || !n.joined) continue;
      if (!n.busy) {
        if (n.queue.empty()) {
          if (n.cfg.traffic.kind != TrafficKind::kSaturated || !more_packets(n)) continue;
          ++n.m.generated;
          n.queue.push_back(now);
        }
        n.busy = true;
        n.arrival = n.queue.front();
        n.queue.pop_front();
        n.payload.resize(n.cfg.traffic.payload_bytes);
        std::uniform_int_distribution<int> byte(0, 255);
        for (auto& b : n.payload) b = static_cast<std::uint8_t>(byte(n.rng));
        ++n.serial;
        n.serial_delivered = false;
        n.rec.attempts = 0;
      }
      ++n.rec.attempts;
      ++n.token;
      n.rec.state = mac::MacState::kTx;
      const Tick air = packet_airtime(n.payload.size());
      const int copies = static_cast<int>(mac::transmissions_per_packet(n.cfg.gamma));
      for (int c = 0; c < copies; ++c) {
        copies_.push_back({i, now + c * air, c + 1 == copies});
      }
    }
    std::sort(copies_.begin(), copies_.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
    schedule_copies(now);
    push(now + round_, EventKind::kTdmaRound, 0);
  }

  struct Copy {
    std::size_t node;
    Tick at;
    bool last;
  };

  void schedule_copies(Tick now) {
    // Copies starting now begin immediately; later ones wait for their turn
    // through the regular event queue.
    std::vector<Copy> later;
    for (const auto& c : copies_) {
      if (c.at == now) {
        begin_tx(c.node, now, c.last);
      } else {
        later.push_back(c);
      }
    }
    copies_.clear();
    for (const auto& c : later) {
      pending_copies_.push_back(c);
      push(c.at, EventKind::kTxStart, c.node, kCopyToken);
    }
  }

  static constexpr std::uint64_t kCopyToken = ~std::uint64_t{0};

  // --- results ------------------------------------------------------------

  MetricsReport finish() {
    const Tick horizon = cfg_.run.horizon_ticks;
    MetricsReport rep;
    rep.name = cfg_.name;
    rep.seed = cfg_.run.seed;
    rep.phy_mode = full_ ? "full" : "abstract";
    rep.horizon_ticks = horizon;
    rep.tick_s = tick_s_;
    const EnergyProfile profile = EnergyProfile::cc1070();
    const double horizon_s = static_cast<double>(horizon) * tick_s_;
    for (auto& n : nodes_) {
      n.energy.close(horizon);
      auto& m = n.m;
      for (RadioState s : kRadioStates) m.state_ticks[static_cast<std::size_t>(s)] = n.energy.ticks(s);
      m.energy_mj = account_energy(n.energy.durations(tick_s_), profile);
      m.prr = m.sent ? static_cast<double>(m.delivered) / static_cast<double>(m.sent) : 0.0;
      m.throughput_bps = static_cast<double>(m.delivered * 8 * n.cfg.traffic.payload_bytes) / horizon_s;
      m.mean_latency_s = m.delivered ? m.latency_sum_s / static_cast<double>(m.delivered) : 0.0;
      m.mean_relay_latency_s = m.relayed ? m.relay_latency_sum_s / static_cast<double>(m.relayed) : 0.0;
      m.tx_power_dbm = n.tx_power;
      if (n.busy) ++rep.in_flight;
      rep.nodes.push_back(m);
    }
    std::sort(rep.nodes.begin(), rep.nodes.end(),
              [](const NodeMetrics& a, const NodeMetrics& b) { return a.id < b.id; });
    rep.fft_executions = (rx_ ? rx_->transforms() : 0) + join_fft_;
    rep.phy_ticks = phy_ticks_;
    return rep;
  }

  struct Relay {
    std::size_t src;
    Tick decoded;
    Tick delivery;
    SubcarrierId downlink;
  };

  const ScenarioConfig& cfg_;
  SubcarrierPlan plan_;
  std::int64_t bs_id_;
  phy::ModulationScheme scheme_;
  int r_;
  double tick_s_;
  Rng bs_rng_;
  phy::OfdmGeometry geo_;
  mac::SubcarrierHealth health_;
  std::optional<CalibrationTable> calibration_;
  bool full_ = false;
  bool has_join_ = false;
  bool force_trace_ = false;
  double reference_loss_ = 0.0;
  Tick join_airtime_ = 0;
  std::optional<SubcarrierId> downlink_;
  std::optional<mac::BaseStationMac> bs_;
  std::optional<phy::GfftReceiver> rx_;
  std::optional<phy::DecodeMatrix> matrix_;
  std::vector<cd> window_;
  std::vector<std::vector<cd>> tones_;
  std::vector<cd> scratch_tone_;
  std::map<std::size_t, std::pair<Tick, phy::DecodedFrame>> decoded_;
  std::vector<NodeState> nodes_;
  std::vector<Transmission> txs_;
  std::vector<std::size_t> active_;
  std::vector<DownlinkInterval> downlink_tx_;
  std::vector<mac::RxOutcome> pending_;
  std::vector<std::size_t> pending_nodes_;
  Tick downlink_busy_until_ = 0;
  std::vector<Relay> relays_;
  std::map<mac::NodeId, SubcarrierId> overrides_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  std::uint64_t phy_ticks_ = 0;
  std::uint64_t join_fft_ = 0;
  mac::TraceLog trace_;
  std::size_t groups_ = 1;
  Tick round_ = 1;
  Tick tdma_start_ = 0;
  std::vector<Copy> copies_;
  std::vector<Copy> pending_copies_;
};

// --- aggregation and reporting ---------------------------------------------

inline NodeMetrics aggregate(const std::vector<NodeMetrics>& nodes) {
  NodeMetrics a;
  a.subcarrier = -1;
  double throughput = 0.0;
  for (const auto& m : nodes) {
    a.generated += m.generated;
    a.sent += m.sent;
    a.delivered += m.delivered;
    a.dropped += m.dropped;
    a.transmissions += m.transmissions;
    a.tx_delivered += m.tx_delivered;
    a.crc_failed += m.crc_failed;
    a.collided += m.collided;
    a.relayed += m.relayed;
    a.energy_mj += m.energy_mj;
    a.latency_sum_s += m.latency_sum_s;
    a.relay_latency_sum_s += m.relay_latency_sum_s;
    for (std::size_t s = 0; s < 4; ++s) a.state_ticks[s] += m.state_ticks[s];
    throughput += m.throughput_bps;
  }
  a.throughput_bps = throughput;
  a.prr = a.sent ? static_cast<double>(a.delivered) / static_cast<double>(a.sent) : 0.0;
  a.mean_latency_s = a.delivered ? a.latency_sum_s / static_cast<double>(a.delivered) : 0.0;
  a.mean_relay_latency_s = a.relayed ? a.relay_latency_sum_s / static_cast<double>(a.relayed) : 0.0;
  return a;
}

namespace detail {

inline void emit_metrics(YAML::Emitter& out, const NodeMetrics& m, bool with_id) {
  out << YAML::BeginMap;
  if (with_id) {
    out << YAML::Key << "id" << YAML::Value << m.id;
    out << YAML::Key << "subcarrier" << YAML::Value << m.subcarrier;
    out << YAML::Key << "tx_power_dbm" << YAML::Value << m.tx_power_dbm;
  }
  out << YAML::Key << "generated" << YAML::Value << m.generated;
  out << YAML::Key << "sent" << YAML::Value << m.sent;
  out << YAML::Key << "delivered" << YAML::Value << m.delivered;
  out << YAML::Key << "dropped" << YAML::Value << m.dropped;
  out << YAML::Key << "transmissions" << YAML::Value << m.transmissions;
  out << YAML::Key << "crc_failed" << YAML::Value << m.crc_failed;
  out << YAML::Key << "collided" << YAML::Value << m.collided;
  out << YAML::Key << "relayed" << YAML::Value << m.relayed;
  out << YAML::Key << "prr" << YAML::Value << m.prr;
  out << YAML::Key << "throughput_bps" << YAML::Value << m.throughput_bps;
  out << YAML::Key << "mean_latency_s" << YAML::Value << m.mean_latency_s;
  out << YAML::Key << "mean_relay_latency_s" << YAML::Value << m.mean_relay_latency_s;
  out << YAML::Key << "energy_mj" << YAML::Value << m.energy_mj;
  out << YAML::Key << "state_ticks" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (RadioState s : kRadioStates) {
    out << YAML::Key << std::string(to_string(s)) << YAML::Value
        << m.state_ticks[static_cast<std::size_t>(s)];
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
}

}  // namespace detail

// Deterministic: fixed key order, nodes sorted by id, fixed precision.
inline std::string report_to_yaml(const MetricsReport& r) {
  YAML::Emitter out;
  out.SetDoublePrecision(10);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << r.name;
  out << YAML::Key << "seed" << YAML::Value << r.seed;
  out << YAML::Key << "phy_mode" << YAML::Value << r.phy_mode;
  out << YAML::Key << "horizon_ticks" << YAML::Value << r.horizon_ticks;
  out << YAML::Key << "tick_s" << YAML::Value << r.tick_s;
  out << YAML::Key << "base_stations" << YAML::Value << r.base_stations;
  out << YAML::Key << "in_flight" << YAML::Value << r.in_flight;
  out << YAML::Key << "fft_executions" << YAML::Value << r.fft_executions;
  out << YAML::Key << "phy_ticks" << YAML::Value << r.phy_ticks;
  out << YAML::Key << "aggregate" << YAML::Value;
  detail::emit_metrics(out, r.aggregate, false);
  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : r.nodes) detail::emit_metrics(out, m, true);
  out << YAML::EndSeq;
  if (r.sop) {
    const auto& s = *r.sop;
    out << YAML::Key << "sop" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "algorithm" << YAML::Value << s.algorithm;
    out << YAML::Key << "objective" << YAML::Value << s.objective;
    out << YAML::Key << "bound" << YAML::Value << s.bound;
    out << YAML::Key << "feasible" << YAML::Value << s.feasible;
    out << YAML::Key << "allocation" << YAML::Value << YAML::BeginSeq;
    for (const auto& set : s.allocation) {
      out << YAML::Flow << YAML::BeginSeq;
      for (int v : set) out << v;
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "tree_links" << YAML::Value << YAML::BeginSeq;
    for (const auto& [link, sc] : s.tree_links) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "child" << YAML::Value << link.first
          << YAML::Key << "parent" << YAML::Value << link.second << YAML::Key << "subcarrier"
          << YAML::Value << sc << YAML::EndMap;
    }
    out << YAML::EndSeq;
    if (!s.tree_link_error.empty()) {
      out << YAML::Key << "tree_link_error" << YAML::Value << s.tree_link_error;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

struct ScenarioResult {
  MetricsReport report;
  mac::TraceLog trace;
};

namespace detail {

inline void merge_trace(mac::TraceLog& into, const mac::TraceLog& from) {
  for (const auto& e : from.events()) into.add(e.tick, e.node, e.event, e.subcarrier);
}

// Relay deliveries are logged ahead of time; order everything by tick.
inline mac::TraceLog sorted_trace(const mac::TraceLog& log) {
  auto events = log.events();
  std::stable_sort(events.begin(), events.end(),
                   [](const mac::TraceEvent& a, const mac::TraceEvent& b) { return a.tick < b.tick; });
  mac::TraceLog out;
  for (const auto& e : events) out.add(e.tick, e.node, e.event, e.subcarrier);
  return out;
}

}  // namespace detail

// Runs a whole scenario. With an `sop` section every base station gets its
// allocation X_i, minus the subcarriers carrying its tree links, and serves
// the nodes nearest to it. Base stations run independently: the allocation
// is what keeps their uplinks apart.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg,
                                   std::optional<CalibrationTable> calibration = std::nullopt) {
  cfg.validate();
  if (!calibration && cfg.run.phy_mode == PhyMode::kAbstract && !cfg.channel.noiseless) {
    calibration = scenario_calibration(cfg);
  }
  ScenarioResult out;
  std::uint64_t ffts = 0, phy_ticks = 0, in_flight = 0;

  if (!cfg.sop) {
    Network net(cfg, cfg.plan(), -1, calibration);
    out.report = net.run();
    out.trace = detail::sorted_trace(net.trace());
    out.report.aggregate = aggregate(out.report.nodes);
    return out;
  }

  const auto inst = cfg.sop->resolve();
  const auto solved = sop::solve(inst, cfg.sop->algorithm, cfg.sop->seed);
  SopSummary summary;
  summary.algorithm = cfg.sop->algorithm;
  summary.objective = solved.objective;
  summary.bound = inst.total_availability();
  summary.feasible = solved.report.feasible;
  summary.allocation = solved.allocation;
  try {
    summary.tree_links = sop::assign_tree_links(inst, solved.allocation);
  } catch (const Error& e) {
    summary.tree_link_error = e.what();
  }

  const auto plan = cfg.plan();
  std::vector<std::vector<NodeConfig>> members(inst.size());
  for (const auto& n : cfg.nodes) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const double d = std::hypot(n.position.x - inst.bs[i].position.x,
                                  n.position.y - inst.bs[i].position.y);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    members[best].push_back(n);
  }

  MetricsReport merged;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (members[i].empty()) continue;
    std::set<int> links;
    for (const auto& [link, sc] : summary.tree_links) {
      if (link.first == i || link.second == i) links.insert(sc);
    }
    std::vector<SubcarrierId> keep;
    for (int x : solved.allocation[i]) {
      if (x >= 0 && static_cast<std::size_t>(x) < plan.size() && !links.contains(x)) {
        keep.push_back({static_cast<std::size_t>(x)});
      }
    }
    if (keep.empty()) {
      throw Error("base station " + std::to_string(i) + " has no subcarriers left for its nodes");
    }
    ScenarioConfig sub = cfg;
    sub.sop.reset();
    sub.nodes = members[i];
    sub.bs_position = {inst.bs[i].position.x, inst.bs[i].position.y};
    sub.run.seed = derive_seed(cfg.run.seed, 0x5000 + i);
    const auto restricted = plan.restricted_to(keep);
    auto usable = [&](const std::optional<std::size_t>& sc) {
      return sc && *sc < restricted.size() && restricted.usable({*sc});
    };
    if (!usable(sub.mac.join_subcarrier)) sub.mac.join_subcarrier.reset();
    if (!usable(sub.mac.downlink_subcarrier)) sub.mac.downlink_subcarrier.reset();
    for (auto& n : sub.nodes) {
      if (n.subcarrier && !usable(n.subcarrier)) n.subcarrier.reset();
    }
    Network net(sub, restricted, -1 - static_cast<std::int64_t>(i), calibration);
    auto rep = net.run();
    detail::merge_trace(out.trace, net.trace());
    for (auto& m : rep.nodes) merged.nodes.push_back(m);
    ffts += rep.fft_executions;
    phy_ticks += rep.phy_ticks;
    in_flight += rep.in_flight;
    merged.phy_mode = rep.phy_mode;
    merged.tick_s = rep.tick_s;
  }
  std::sort(merged.nodes.begin(), merged.nodes.end(),
            [](const NodeMetrics& a, const NodeMetrics& b) { return a.id < b.id; });
  merged.name = cfg.name;
  merged.seed = cfg.run.seed;
  merged.horizon_ticks = cfg.run.horizon_ticks;
  if (merged.phy_mode.empty()) merged.phy_mode = cfg.run.phy_mode == PhyMode::kFull ? "full" : "abstract";
  merged.tick_s = 1.0 / cfg.run.chip_rate_hz;
  merged.base_stations = inst.size();
  merged.fft_executions = ffts;
  merged.phy_ticks = phy_ticks;
  merged.in_flight = in_flight;
  merged.aggregate = aggregate(merged.nodes);
  merged.sop = summary;
  out.report = std::move(merged);
  out.trace = detail::sorted_trace(out.trace);
  return out;
}

}  // namespace snow::sim

#endif  // SNOW_SIM_SIMULATOR_HPP_
