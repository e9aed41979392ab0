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

#ifndef SNOW_MAC_ACK_HPP_
#define SNOW_MAC_ACK_HPP_

// Base-station acknowledgements. The Tx radio either answers on every
// acknowledged uplink subcarrier at once (one IFFT carries all ACK frames),
// or sends a single frame on a dedicated downlink subcarrier whose payload is
// a bit-vector with bit i set when subcarrier i was received.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "snow/error.hpp"
#include "snow/mac/allocation.hpp"
#include "snow/phy/framing.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"
#include "snow/spectrum.hpp"

namespace snow::mac {

enum class AckMode { kPerSubcarrier, kBitVector };

inline constexpr std::uint8_t kBaseStationAddress = 0xFF;

struct AckBitVector {
  std::vector<bool> bits;

  explicit AckBitVector(std::size_t n = 0) : bits(n, false) {}

  std::size_t size() const { return bits.size(); }
  bool test(SubcarrierId sc) const { return bits.at(sc.index); }
  void set(SubcarrierId sc, bool v = true) { bits.at(sc.index) = v; }

  std::vector<std::uint8_t> pack() const {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return out;
  }

  static AckBitVector unpack(const std::vector<std::uint8_t>& bytes, std::size_t n) {
    if (bytes.size() * 8 < n) throw Error("bit-vector payload too short");
    AckBitVector v(n);
    for (std::size_t i = 0; i < n; ++i) v.bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return v;
  }

  bool operator==(const AckBitVector&) const = default;
};

// One uplink reception the BS is about to acknowledge.
struct RxOutcome {
  SubcarrierId subcarrier{};
  NodeId node = 0;
  bool valid = false;
};

struct AckPlan {
  AckBitVector vector;
  // Shared subcarrier with a valid and an invalid packet: the bit is cleared
  // and each valid sender gets a directed ACK on its own subcarrier.
  std::vector<RxOutcome> directed;
};

inline AckPlan plan_acks(const std::vector<RxOutcome>& batch, std::size_t subcarriers) {
  AckPlan plan{AckBitVector(subcarriers), {}};
  std::map<SubcarrierId, std::pair<int, int>> tally;  // valid, invalid
  for (const auto& r : batch) {
    auto& t = tally[r.subcarrier];
    (r.valid ? t.first : t.second)++;
  }
  for (const auto& [sc, t] : tally) {
    if (t.first > 0 && t.second == 0) plan.vector.set(sc);
  }
  for (const auto& r : batch) {
    const auto& t = tally[r.subcarrier];
    if (r.valid && t.second > 0) plan.directed.push_back(r);
  }
  return plan;
}

// Worst-case time a node keeps listening on its own subcarrier for a
// directed ACK: G sharers times one packet airtime.
inline std::int64_t directed_ack_wait(std::size_t sharers, std::int64_t packet_ticks) {
  return static_cast<std::int64_t>(sharers) * packet_ticks;
}

// Chip-by-chip downlink: entry t is the symbol map for chip period t.
struct DownlinkBurst {
  std::vector<phy::SymbolMap> ticks;
  std::size_t length() const { return ticks.size(); }
};

struct AckEncoding {
  phy::ModulationScheme scheme;
  std::optional<SubcarrierId> downlink;
  std::uint32_t sync_word = phy::kDefaultSyncWord;
};

inline phy::Packet ack_frame(SubcarrierId sc, const std::vector<std::uint8_t>& payload,
                             std::uint32_t sync_word) {
  return phy::frame_packet(payload, kBaseStationAddress, sc, sync_word);
}

inline std::size_t ack_frame_chips(AckMode mode, std::size_t subcarriers, int r) {
  const std::size_t payload = mode == AckMode::kBitVector ? (subcarriers + 7) / 8 : 0;
  return phy::frame_bit_count(payload) * static_cast<std::size_t>(r);
}

inline DownlinkBurst bs_ack_encode(const std::set<SubcarrierId>& received, AckMode mode,
                                   const SubcarrierPlan& plan, const AckEncoding& enc) {
  for (auto sc : received) {
    if (!plan.usable(sc)) throw Error("ACK for an unusable subcarrier");
  }
  std::vector<std::pair<SubcarrierId, phy::Bits>> frames;
  if (mode == AckMode::kPerSubcarrier) {
    for (auto sc : received) {
      frames.emplace_back(sc, phy::packet_chips(ack_frame(sc, {}, enc.sync_word),
                                                enc.scheme.spreading_factor));
    }
  } else {
    if (!enc.downlink) throw Error("bit-vector ACK needs a downlink subcarrier");
    AckBitVector v(plan.size());
    for (auto sc : received) v.set(sc);
    frames.emplace_back(*enc.downlink,
                        phy::packet_chips(ack_frame(*enc.downlink, v.pack(), enc.sync_word),
                                          enc.scheme.spreading_factor));
  }
  DownlinkBurst burst;
  for (const auto& [sc, chips] : frames) {
    if (burst.ticks.size() < chips.size()) burst.ticks.resize(chips.size());
    for (std::size_t t = 0; t < chips.size(); ++t) {
      burst.ticks[t][sc] = phy::chip_symbol(chips[t], enc.scheme.kind);
    }
  }
  return burst;
}

}  // namespace snow::mac

#endif  // SNOW_MAC_ACK_HPP_
