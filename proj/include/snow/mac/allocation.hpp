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

#ifndef SNOW_MAC_ALLOCATION_HPP_
#define SNOW_MAC_ALLOCATION_HPP_

// Location-aware subcarrier allocation. The BS knows node positions, so it
// can estimate which node pairs are hidden from each other (both reach the
// BS, neither hears the other). Each node then gets the subcarrier with the
// fewest hidden cohabitants, then the fewest occupants, then the lowest index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "snow/error.hpp"
#include "snow/spectrum.hpp"

namespace snow::mac {

using NodeId = std::uint32_t;

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct NodeSite {
  NodeId id = 0;
  Position position;
};

struct Audibility {
  double comm_range_m = 100.0;  // node <-> node
  double bs_range_m = 1000.0;   // node <-> BS
  Position bs_position{};

  bool hears(Position a, Position b) const { return distance(a, b) <= comm_range_m; }
  bool reaches_bs(Position p) const { return distance(p, bs_position) <= bs_range_m; }
  bool hidden(Position a, Position b) const {
    return !hears(a, b) && reaches_bs(a) && reaches_bs(b);
  }
};

using HiddenSets = std::map<NodeId, std::set<NodeId>>;

inline HiddenSets hidden_sets(const std::vector<NodeSite>& nodes, const Audibility& audio) {
  HiddenSets out;
  for (const auto& u : nodes) out[u.id];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (audio.hidden(nodes[i].position, nodes[j].position)) {
        out[nodes[i].id].insert(nodes[j].id);
        out[nodes[j].id].insert(nodes[i].id);
      }
    }
  }
  return out;
}

struct Assignment {
  std::vector<std::set<NodeId>> occupants;  // Omega(f_i), one per subcarrier
  std::map<NodeId, SubcarrierId> of_node;

  explicit Assignment(std::size_t subcarriers = 0) : occupants(subcarriers) {}

  void assign(NodeId node, SubcarrierId sc) {
    release(node);
    occupants.at(sc.index).insert(node);
    of_node[node] = sc;
  }

  void release(NodeId node) {
    auto it = of_node.find(node);
    if (it == of_node.end()) return;
    occupants[it->second.index].erase(node);
    of_node.erase(it);
  }

  std::size_t occupancy(SubcarrierId sc) const { return occupants.at(sc.index).size(); }

  // Sum over nodes of |Omega(f(u)) intersect H(u)|.
  std::size_t hidden_cohabitation(const HiddenSets& hidden) const {
    std::size_t total = 0;
    for (const auto& [node, sc] : of_node) {
      auto h = hidden.find(node);
      if (h == hidden.end()) continue;
      for (NodeId v : occupants[sc.index]) total += h->second.count(v);
    }
    return total;
  }

  bool operator==(const Assignment&) const = default;
};

// Picks the subcarrier for `node` among `candidates` by the allocation rule.
inline SubcarrierId best_subcarrier(const Assignment& a, const std::set<NodeId>& hidden_of_node,
                                    const std::vector<SubcarrierId>& candidates) {
  if (candidates.empty()) throw Error("no usable subcarriers");
  SubcarrierId best = candidates.front();
  std::size_t best_hidden = SIZE_MAX, best_occ = SIZE_MAX;
  for (SubcarrierId sc : candidates) {
    std::size_t h = 0;
    for (NodeId v : a.occupants.at(sc.index)) h += hidden_of_node.count(v);
    const std::size_t occ = a.occupancy(sc);
    if (h < best_hidden || (h == best_hidden && occ < best_occ)) {
      best = sc;
      best_hidden = h;
      best_occ = occ;
    }
  }
  return best;
}

// Usable subcarriers minus `reserved` (join/downlink and their guards).
inline std::vector<SubcarrierId> uplink_pool(const SubcarrierPlan& plan,
                                             const std::set<SubcarrierId>& reserved = {}) {
  std::vector<SubcarrierId> pool;
  for (SubcarrierId sc : plan.usable_ids()) {
    if (!reserved.contains(sc)) pool.push_back(sc);
  }
  return pool;
}

inline Assignment allocate_subcarriers(std::vector<NodeSite> nodes, const SubcarrierPlan& plan,
                                       const Audibility& audio,
                                       const std::set<SubcarrierId>& reserved = {}) {
  const auto pool = uplink_pool(plan, reserved);
  if (pool.empty()) throw Error("no usable subcarriers");
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeSite& a, const NodeSite& b) { return a.id < b.id; });
  const HiddenSets hidden = hidden_sets(nodes, audio);
  Assignment a(plan.size());
  for (const auto& u : nodes) a.assign(u.id, best_subcarrier(a, hidden.at(u.id), pool));
  return a;
}

}  // namespace snow::mac

#endif  // SNOW_MAC_ALLOCATION_HPP_
