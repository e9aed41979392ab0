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

#ifndef SNOW_MAC_NETWORK_HPP_
#define SNOW_MAC_NETWORK_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "snow/error.hpp"
#include "snow/estimation.hpp"
#include "snow/mac/allocation.hpp"
#include "snow/spectrum.hpp"

namespace snow::mac {

using Tick = std::int64_t;

// A join request as seen by the BS: the join subcarrier's bin value on each
// tick of the request preamble, next to the symbols the node was supposed to
// send. One tick is one sample of this sequence.
struct JoinRequest {
  NodeId node = 0;
  Position position;
  std::vector<cd> rx_bins;
  std::vector<cd> known_symbols;
};

struct JoinReply {
  SubcarrierId subcarrier{};
  double cfo_feedback_hz = 0.0;  // offset the node should pre-compensate
  estimation::CfoEstimate estimate;
  std::optional<SubcarrierId> downlink;
  std::vector<SubcarrierId> backups;
};

struct BaseStationConfig {
  SubcarrierId join{};
  std::optional<SubcarrierId> downlink;
  std::set<SubcarrierId> reserved;  // join, its guards and downlink
  Audibility audibility;
  double tick_rate_hz = 0.0;
  std::size_t cfo_lag_ticks = 1;
  // A whole frame must stay phase-coherent after compensation, which a
  // one-tick fine lag cannot deliver at low SNR.
  std::size_t cfo_fine_lag_ticks = 32;
  std::size_t backup_count = 2;
  Tick inactivity_window = 0;  // 0 disables eviction
};

class BaseStationMac {
 public:
  BaseStationMac(SubcarrierPlan plan, BaseStationConfig cfg)
      : plan_(std::move(plan)), cfg_(std::move(cfg)), assignment_(plan_.size()) {
    if (!plan_.usable(cfg_.join)) throw Error("join subcarrier is not usable");
    if (cfg_.downlink && !plan_.usable(*cfg_.downlink)) {
      throw Error("downlink subcarrier is not usable");
    }
    pool_ = uplink_pool(plan_, cfg_.reserved);
    if (pool_.empty()) throw Error("no usable subcarriers");
  }

  const SubcarrierPlan& plan() const { return plan_; }
  const Assignment& assignment() const { return assignment_; }
  const std::vector<SubcarrierId>& pool() const { return pool_; }
  bool joined(NodeId node) const { return sites_.contains(node); }

  std::optional<SubcarrierId> subcarrier_of(NodeId node) const {
    auto it = assignment_.of_node.find(node);
    if (it == assignment_.of_node.end()) return std::nullopt;
    return it->second;
  }

  // Estimates the joiner's CFO on the join subcarrier, assigns it a subcarrier
  // and returns the feedback scaled to that subcarrier.
  JoinReply handle_join(const JoinRequest& req, Tick now) {
    JoinReply reply;
    const double f_join = static_cast<double>(plan_.center(cfg_.join));
    if (!req.rx_bins.empty()) {
      reply.estimate = estimation::estimate_cfo(
          req.rx_bins, req.known_symbols,
          {cfg_.tick_rate_hz, cfg_.cfo_lag_ticks, f_join, cfg_.cfo_fine_lag_ticks});
    }

    sites_[req.node] = req.position;
    std::set<NodeId> hidden;
    for (const auto& [id, pos] : sites_) {
      if (id != req.node && cfg_.audibility.hidden(req.position, pos)) hidden.insert(id);
    }
    assignment_.release(req.node);
    reply.subcarrier = best_subcarrier(assignment_, hidden, pool_);
    assignment_.assign(req.node, reply.subcarrier);
    last_heard_[req.node] = now;

    const double f_assigned = static_cast<double>(plan_.center(reply.subcarrier));
    reply.cfo_feedback_hz = req.rx_bins.empty()
                                ? 0.0
                                : estimation::scale_cfo(reply.estimate, f_join, f_assigned);
    reply.downlink = cfg_.downlink;
    reply.backups = backups_for(reply.subcarrier);
    return reply;
  }

  void note_activity(NodeId node, Tick now) {
    if (joined(node)) last_heard_[node] = now;
  }

  // Drops nodes not heard from within the inactivity window.
  std::vector<NodeId> evict_inactive(Tick now) {
    std::vector<NodeId> evicted;
    if (cfg_.inactivity_window <= 0) return evicted;
    for (const auto& [node, last] : last_heard_) {
      if (now - last > cfg_.inactivity_window) evicted.push_back(node);
    }
    for (NodeId node : evicted) leave(node);
    return evicted;
  }

  void leave(NodeId node) {
    assignment_.release(node);
    sites_.erase(node);
    last_heard_.erase(node);
  }

 private:
  // Least-occupied pool members other than `primary`, lowest index first.
  std::vector<SubcarrierId> backups_for(SubcarrierId primary) const {
    std::vector<SubcarrierId> c;
    for (SubcarrierId sc : pool_) {
      if (sc != primary) c.push_back(sc);
    }
    std::stable_sort(c.begin(), c.end(), [&](SubcarrierId a, SubcarrierId b) {
      return assignment_.occupancy(a) < assignment_.occupancy(b);
    });
    if (c.size() > cfg_.backup_count) c.resize(cfg_.backup_count);
    return c;
  }

  SubcarrierPlan plan_;
  BaseStationConfig cfg_;
  Assignment assignment_;
  std::vector<SubcarrierId> pool_;
  std::map<NodeId, Position> sites_;
  std::map<NodeId, Tick> last_heard_;
};

// --- peer-to-peer through the BS -------------------------------------------

inline Tick next_beacon(Tick t, Tick beacon_period) {
  if (beacon_period <= 0) throw Error("beacon period must be positive");
  return (t + beacon_period - 1) / beacon_period * beacon_period;
}

struct RelayOutcome {
  bool delivered = false;
  std::string reason;  // set when dropped
  Tick delivery_tick = 0;
  SubcarrierId downlink{};
};

// The uplink finished at `uplink_end`; the BS forwards on the destination's
// subcarrier at the next beacon, when the destination is awake to listen.
// Peers sharing a subcarrier still go through the BS.
inline RelayOutcome relay_peer_to_peer(const BaseStationMac& bs, NodeId src, NodeId dst,
                                       Tick uplink_end, Tick beacon_period,
                                       Tick downlink_airtime) {
  RelayOutcome out;
  if (!bs.joined(src)) {
    out.reason = "unknown source";
    return out;
  }
  auto sc = bs.subcarrier_of(dst);
  if (!sc) {
    out.reason = "unknown destination";
    return out;
  }
  out.delivered = true;
  out.downlink = *sc;
  out.delivery_tick = next_beacon(uplink_end, beacon_period) + downlink_airtime;
  return out;
}

// --- subcarrier health ------------------------------------------------------

// Sliding-window failure rate per subcarrier. Subcarriers above the threshold
// are "bad"; their occupants are moved to the least-occupied healthy pool
// member, so only bad subcarriers shed load.
class SubcarrierHealth {
 public:
  SubcarrierHealth(std::size_t subcarriers, std::size_t window, double threshold)
      : history_(subcarriers), window_(window), threshold_(threshold) {
    if (window == 0) throw Error("health window must be positive");
  }

  void record(SubcarrierId sc, bool success) {
    auto& h = history_.at(sc.index);
    h.push_back(success);
    if (h.size() > window_) h.pop_front();
  }

  double failure_rate(SubcarrierId sc) const {
    const auto& h = history_.at(sc.index);
    if (h.empty()) return 0.0;
    return static_cast<double>(std::count(h.begin(), h.end(), false)) /
           static_cast<double>(h.size());
  }

  bool bad(SubcarrierId sc) const {
    return history_.at(sc.index).size() == window_ && failure_rate(sc) > threshold_;
  }

  struct Swap {
    NodeId node;
    SubcarrierId from, to;
  };

  std::vector<Swap> rebalance(Assignment& a, const std::vector<SubcarrierId>& pool) {
    std::vector<Swap> swaps;
    for (SubcarrierId from : pool) {
      if (!bad(from)) continue;
      const std::set<NodeId> movers = a.occupants.at(from.index);
      for (NodeId node : movers) {
        std::optional<SubcarrierId> to;
        for (SubcarrierId sc : pool) {
          if (bad(sc)) continue;
          if (!to || a.occupancy(sc) < a.occupancy(*to)) to = sc;
        }
        if (!to) return swaps;
        a.assign(node, *to);
        swaps.push_back({node, from, *to});
      }
      history_[from.index].clear();
    }
    return swaps;
  }

 private:
  std::vector<std::deque<bool>> history_;
  std::size_t window_;
  double threshold_;
};

// --- legacy phased TDMA -----------------------------------------------------

// With more nodes than subcarriers, nodes are split into groups of `n` by
// index and the groups take turns round-robin.
inline std::size_t tdma_group_count(std::size_t nodes, std::size_t n) {
  if (n == 0) throw Error("no subcarriers for TDMA groups");
  return std::max<std::size_t>(1, (nodes + n - 1) / n);
}

inline bool tdma_active(std::size_t node_index, std::size_t nodes, std::size_t n,
                        std::uint64_t round) {
  return node_index / n == round % tdma_group_count(nodes, n);
}

// Proactive redundancy: each packet is sent `gamma` times back to back.
inline std::size_t transmissions_per_packet(int gamma) {
  if (gamma < 1) throw Error("gamma must be >= 1");
  return static_cast<std::size_t>(gamma);
}

}  // namespace snow::mac

#endif  // SNOW_MAC_NETWORK_HPP_
