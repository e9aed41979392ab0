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

#ifndef SNOW_SIM_ENERGY_HPP_
#define SNOW_SIM_ENERGY_HPP_

#include <array>
#include <cstdint>
#include <string_view>

#include "snow/error.hpp"

namespace snow::sim {

enum class RadioState { kTx, kRx, kIdle, kSleep };

inline constexpr std::array<RadioState, 4> kRadioStates = {RadioState::kTx, RadioState::kRx,
                                                           RadioState::kIdle, RadioState::kSleep};

inline std::string_view to_string(RadioState s) {
  switch (s) {
    case RadioState::kTx: return "tx";
    case RadioState::kRx: return "rx";
    case RadioState::kIdle: return "idle";
    case RadioState::kSleep: return "sleep";
  }
  return "?";
}

// Radio currents. The CC1070 draws more in Rx than in Tx, so no ordering
// between states is enforced, only positivity.
struct EnergyProfile {
  double tx_ma = 17.5;
  double rx_ma = 18.8;
  double idle_ma = 0.5;
  double sleep_ua = 0.2;
  double supply_v = 3.0;

  static EnergyProfile cc1070() { return {}; }

  void validate() const {
    if (!(tx_ma > 0 && rx_ma > 0 && idle_ma > 0 && sleep_ua > 0 && supply_v > 0)) {
      throw Error("energy profile values must be positive");
    }
  }

  double current_a(RadioState s) const {
    switch (s) {
      case RadioState::kTx: return tx_ma * 1e-3;
      case RadioState::kRx: return rx_ma * 1e-3;
      case RadioState::kIdle: return idle_ma * 1e-3;
      case RadioState::kSleep: return sleep_ua * 1e-6;
    }
    return 0.0;
  }

  bool operator==(const EnergyProfile&) const = default;
};

struct StateDurations {
  double tx_s = 0.0;
  double rx_s = 0.0;
  double idle_s = 0.0;
  double sleep_s = 0.0;

  double& operator[](RadioState s) {
    switch (s) {
      case RadioState::kTx: return tx_s;
      case RadioState::kRx: return rx_s;
      case RadioState::kIdle: return idle_s;
      case RadioState::kSleep: break;
    }
    return sleep_s;
  }
  double operator[](RadioState s) const { return const_cast<StateDurations&>(*this)[s]; }
};

// Millijoules: sum of duration * current * supply.
inline double account_energy(const StateDurations& d, const EnergyProfile& p) {
  double mj = 0.0;
  for (RadioState s : kRadioStates) {
    if (d[s] < 0.0) throw Error("negative state duration");
    mj += d[s] * p.current_a(s) * p.supply_v * 1e3;
  }
  return mj;
}

// Per-node time-in-state in ticks. The node is in exactly one state at a
// time; `close` charges the remainder up to the horizon.
class EnergyLedger {
 public:
  void set(RadioState s, std::int64_t tick) {
    charge(tick);
    state_ = s;
  }

  void close(std::int64_t horizon) { charge(horizon); }

  RadioState state() const { return state_; }
  std::int64_t since() const { return since_; }
  std::int64_t ticks(RadioState s) const { return ticks_[static_cast<std::size_t>(s)]; }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto v : ticks_) t += v;
    return t;
  }

  StateDurations durations(double tick_s) const {
    StateDurations d;
    for (RadioState s : kRadioStates) d[s] = static_cast<double>(ticks(s)) * tick_s;
    return d;
  }

 private:
  void charge(std::int64_t tick) {
    if (tick < since_) throw Error("energy ledger went back in time");
    ticks_[static_cast<std::size_t>(state_)] += tick - since_;
    since_ = tick;
  }

  RadioState state_ = RadioState::kSleep;
  std::int64_t since_ = 0;
  std::array<std::int64_t, 4> ticks_{};
};

}  // namespace snow::sim

#endif  // SNOW_SIM_ENERGY_HPP_
