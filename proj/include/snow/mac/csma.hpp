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

#ifndef SNOW_MAC_CSMA_HPP_
#define SNOW_MAC_CSMA_HPP_

// Node-side CSMA/CA automaton.
//
//   sleep --wake--> backoff(initial) --expiry, CCA clear--> tx --done--> await_ack
//                      ^      |                                           |   |
//                      |      +--expiry, CCA busy--> backoff(congestion)  |   ack -> sleep
//                      +---------------- timeout (attempt < cap) ---------+
//
// Timeouts past the retry cap drop the packet and return to sleep.

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include "snow/error.hpp"
#include "snow/mac/allocation.hpp"

namespace snow::mac {

enum class MacState { kSleep, kBackoff, kCca, kTx, kAwaitAck, kRx };

inline std::string_view to_string(MacState s) {
  switch (s) {
    case MacState::kSleep: return "sleep";
    case MacState::kBackoff: return "backoff";
    case MacState::kCca: return "cca";
    case MacState::kTx: return "tx";
    case MacState::kAwaitAck: return "await_ack";
    case MacState::kRx: return "rx";
  }
  return "?";
}

inline constexpr int kUnlimitedRetries = std::numeric_limits<int>::max();

struct BackoffConfig {
  std::int64_t initial_window = 32;
  std::int64_t congestion_window = 128;
  int retry_cap = 8;

  void validate() const {
    if (initial_window < 1 || congestion_window < 1) throw Error("back-off windows must be >= 1");
    if (retry_cap < 1) throw Error("retry cap must be >= 1");
  }

  bool operator==(const BackoffConfig&) const = default;
};

struct NodeRecord {
  NodeId id = 0;
  Position position;
  SubcarrierId assigned{};
  std::vector<SubcarrierId> backup;
  MacState state = MacState::kSleep;
  int attempts = 0;              // transmissions of the current packet
  std::int64_t backoff_draws = 0;  // lifetime count
};

enum class MacInput { kWake, kBackoffExpired, kTxDone, kAckReceived, kAckTimeout };

enum class MacActionKind { kNone, kBackoff, kTransmit, kAwaitAck, kSleep, kDrop };

struct MacAction {
  MacActionKind kind = MacActionKind::kNone;
  std::int64_t ticks = 0;  // back-off length for kBackoff
};

template <typename Rng>
std::int64_t draw_backoff(std::int64_t window, Rng& rng) {
  std::uniform_int_distribution<std::int64_t> d(0, window - 1);
  return d(rng);
}

// Advances `node` by one MAC input. `carrier_busy` is the CCA outcome and only
// matters for kBackoffExpired. Inputs that do not apply in the current state
// are ignored (kNone), which is how stale timers are absorbed.
template <typename Rng>
MacAction csma_step(NodeRecord& node, MacInput input, bool carrier_busy,
                    const BackoffConfig& cfg, Rng& rng) {
  auto backoff = [&](std::int64_t window) {
    node.state = MacState::kBackoff;
    ++node.backoff_draws;
    return MacAction{MacActionKind::kBackoff, draw_backoff(window, rng)};
  };

  switch (input) {
    case MacInput::kWake:
      if (node.state != MacState::kSleep) return {};
      node.attempts = 0;
      return backoff(cfg.initial_window);
    case MacInput::kBackoffExpired:
      if (node.state != MacState::kBackoff) return {};
      if (carrier_busy) return backoff(cfg.congestion_window);
      node.state = MacState::kTx;
      ++node.attempts;
      return {MacActionKind::kTransmit, 0};
    case MacInput::kTxDone:
      if (node.state != MacState::kTx) return {};
      node.state = MacState::kAwaitAck;
      return {MacActionKind::kAwaitAck, 0};
    case MacInput::kAckReceived:
      if (node.state != MacState::kAwaitAck) return {};
      node.state = MacState::kSleep;
      return {MacActionKind::kSleep, 0};
    case MacInput::kAckTimeout:
      if (node.state != MacState::kAwaitAck) return {};
      if (node.attempts >= cfg.retry_cap) {
        node.state = MacState::kSleep;
        return {MacActionKind::kDrop, 0};
      }
      return backoff(cfg.congestion_window);
  }
  return {};
}

}  // namespace snow::mac

#endif  // SNOW_MAC_CSMA_HPP_
