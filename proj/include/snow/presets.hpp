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

#ifndef SNOW_PRESETS_HPP_
#define SNOW_PRESETS_HPP_

// Shipped scenarios. Each is an ordinary config document, so
// `snowctl simulate --preset NAME` and `--config scenarios/NAME.yaml` agree.

#include <map>
#include <string>
#include <vector>

#include "snow/config.hpp"
#include "snow/error.hpp"

namespace snow {

namespace preset_text {

// Metro defaults: one 6 MHz TV channel, 400 kHz subcarriers at 50% overlap,
// BPSK, SF 8, 40-byte frames (28-byte payload + 12 bytes framing), 0 dBm and
// a -100 dBm noise floor (-94 dBm sensitivity at 6 dB SNR).
inline constexpr const char* kCh3Defaults = R"(name: ch3-defaults
spectrum:
  start_hz: 547000000
  end_hz: 553000000
  width_hz: 400000
  overlap: 0.5
base_station:
  position: [0, 0]
nodes:
  count: 29
  layout: ring
  radius_m: 200
  traffic:
    kind: uniform
    min_ticks: 0
    max_ticks: 200000
    payload_bytes: 28
phy:
  modulation: bpsk
  spreading_factor: 8
  fft_size: 64
channel:
  path_loss_exponent: 3.2
  noise_floor_dbm: -100
mac:
  ack_mode: per_subcarrier
  initial_window: 32
  congestion_window: 128
  retry_cap: 8
run:
  horizon_ticks: 4000000
  seed: 1
)";

// Deployment shape: 25 nodes on one channel, join on the top subcarrier,
// bit-vector ACKs on a dedicated downlink subcarrier, ATPC on.
inline constexpr const char* kCh4Detroit = R"(name: ch4-detroit
spectrum:
  start_hz: 572000000
  end_hz: 578000000
  width_hz: 400000
  overlap: 0.5
base_station:
  position: [0, 0]
nodes:
  count: 25
  layout: ring
  radius_m: 300
  traffic:
    kind: uniform
    min_ticks: 0
    max_ticks: 200000
    payload_bytes: 28
phy:
  modulation: bpsk
  spreading_factor: 8
  fft_size: 64
channel:
  path_loss_exponent: 3.2
  noise_floor_dbm: -100
  cfo_ppm_max: 2
mac:
  ack_mode: bitvector
  join_subcarrier: 28
  downlink_subcarrier: 26
  cfo_feedback: true
atpc:
  enabled: true
  pdr_threshold: 90
run:
  horizon_ticks: 4000000
  seed: 1
)";

// Three base stations: a root with two children, each link sharing a
// distinct part of the channel.
inline constexpr const char* kCh5Tree3 = R"(name: ch5-tree-3
spectrum:
  start_hz: 572000000
  end_hz: 578000000
  width_hz: 400000
  overlap: 0.5
base_station:
  position: [0, 0]
nodes:
  - {id: 0, position: [200, 0]}
  - {id: 1, position: [-200, 0]}
  - {id: 2, position: [0, 200]}
  - {id: 3, position: [4200, 0]}
  - {id: 4, position: [3800, 0]}
  - {id: 5, position: [4000, 200]}
  - {id: 6, position: [-4200, 0]}
  - {id: 7, position: [-3800, 0]}
  - {id: 8, position: [-4000, 200]}
mac:
  ack_mode: per_subcarrier
sop:
  algorithm: greedy
  instance:
    interference_radius_m: 5000
    bs:
      - {id: 0, parent: null, position: [0, 0], sigma: 4,
         availability: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28]}
      - {id: 1, parent: 0, position: [4000, 0], sigma: 4,
         availability: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19]}
      - {id: 2, parent: 0, position: [-4000, 0], sigma: 4,
         availability: [9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28]}
run:
  horizon_ticks: 4000000
  seed: 1
)";

// Fifteen base stations on a 5 x 3 grid, 4 km apart, each child hanging off
// its left (or upper) neighbour; two nodes per BS.
inline constexpr const char* kCh5Tree15 = R"(name: ch5-tree-15
spectrum:
  start_hz: 572000000
  end_hz: 578000000
  width_hz: 400000
  overlap: 0.5
base_station:
  position: [0, 0]
nodes:
  - {id: 0, position: [300, 0]}
  - {id: 1, position: [-300, 0]}
  - {id: 2, position: [4300, 0]}
  - {id: 3, position: [3700, 0]}
  - {id: 4, position: [8300, 0]}
  - {id: 5, position: [7700, 0]}
  - {id: 6, position: [12300, 0]}
  - {id: 7, position: [11700, 0]}
  - {id: 8, position: [16300, 0]}
  - {id: 9, position: [15700, 0]}
  - {id: 10, position: [300, 4000]}
  - {id: 11, position: [-300, 4000]}
  - {id: 12, position: [4300, 4000]}
  - {id: 13, position: [3700, 4000]}
  - {id: 14, position: [8300, 4000]}
  - {id: 15, position: [7700, 4000]}
  - {id: 16, position: [12300, 4000]}
  - {id: 17, position: [11700, 4000]}
  - {id: 18, position: [16300, 4000]}
  - {id: 19, position: [15700, 4000]}
  - {id: 20, position: [300, 8000]}
  - {id: 21, position: [-300, 8000]}
  - {id: 22, position: [4300, 8000]}
  - {id: 23, position: [3700, 8000]}
  - {id: 24, position: [8300, 8000]}
  - {id: 25, position: [7700, 8000]}
  - {id: 26, position: [12300, 8000]}
  - {id: 27, position: [11700, 8000]}
  - {id: 28, position: [16300, 8000]}
  - {id: 29, position: [15700, 8000]}
sop:
  algorithm: greedy
  instance:
    interference_radius_m: 6000
    bs:
      - {id: 0, parent: null, position: [0, 0], sigma: 3,
         availability: [0, 1, 6, 7, 10, 12, 13, 14, 15, 16, 17, 19, 21, 22, 24, 25, 27, 28]}
      - {id: 1, parent: 0, position: [4000, 0], sigma: 3,
         availability: [0, 1, 2, 5, 7, 8, 11, 12, 13, 16, 17, 18, 21, 23, 24, 25, 26, 28]}
      - {id: 2, parent: 1, position: [8000, 0], sigma: 3,
         availability: [0, 1, 2, 3, 5, 6, 7, 8, 13, 14, 15, 17, 19, 20, 21, 23, 24, 27]}
      - {id: 3, parent: 2, position: [12000, 0], sigma: 3,
         availability: [0, 1, 4, 5, 6, 7, 8, 12, 14, 15, 16, 17, 18, 22, 24, 25, 27, 28]}
      - {id: 4, parent: 3, position: [16000, 0], sigma: 3,
         availability: [0, 1, 2, 3, 6, 7, 9, 10, 11, 12, 13, 14, 16, 18, 19, 21, 22, 25]}
      - {id: 5, parent: 0, position: [0, 4000], sigma: 3,
         availability: [0, 1, 3, 5, 7, 8, 12, 13, 14, 15, 16, 17, 18, 20, 22, 24, 25, 28]}
      - {id: 6, parent: 5, position: [4000, 4000], sigma: 3,
         availability: [0, 1, 2, 4, 5, 11, 12, 13, 15, 16, 17, 18, 20, 21, 22, 23, 25, 27]}
      - {id: 7, parent: 6, position: [8000, 4000], sigma: 3,
         availability: [0, 2, 3, 4, 5, 8, 9, 10, 12, 15, 16, 18, 20, 21, 22, 23, 24, 28]}
      - {id: 8, parent: 7, position: [12000, 4000], sigma: 3,
         availability: [0, 1, 2, 4, 5, 7, 8, 9, 10, 12, 13, 18, 20, 21, 22, 25, 26, 28]}
      - {id: 9, parent: 8, position: [16000, 4000], sigma: 3,
         availability: [1, 2, 3, 4, 5, 6, 9, 11, 12, 13, 14, 16, 18, 19, 22, 24, 25, 27]}
      - {id: 10, parent: 5, position: [0, 8000], sigma: 3,
         availability: [0, 1, 2, 3, 6, 8, 10, 12, 15, 16, 19, 20, 21, 22, 23, 25, 26, 27]}
      - {id: 11, parent: 10, position: [4000, 8000], sigma: 3,
         availability: [0, 1, 2, 3, 4, 6, 8, 9, 13, 15, 17, 18, 19, 20, 24, 26, 27, 28]}
      - {id: 12, parent: 11, position: [8000, 8000], sigma: 3,
         availability: [0, 2, 5, 6, 7, 9, 13, 14, 15, 16, 17, 18, 19, 21, 23, 25, 26, 27]}
      - {id: 13, parent: 12, position: [12000, 8000], sigma: 3,
         availability: [1, 2, 4, 6, 8, 9, 11, 15, 16, 17, 18, 20, 21, 24, 25, 26, 27, 28]}
      - {id: 14, parent: 13, position: [16000, 8000], sigma: 3,
         availability: [1, 2, 5, 6, 9, 10, 11, 12, 13, 14, 18, 19, 20, 23, 24, 25, 27, 28]}
mac:
  ack_mode: per_subcarrier
run:
  horizon_ticks: 4000000
  seed: 1
)";

}  // namespace preset_text

inline const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> table = {
      {"ch3-defaults", preset_text::kCh3Defaults},
      {"ch4-detroit", preset_text::kCh4Detroit},
      {"ch5-tree-3", preset_text::kCh5Tree3},
      {"ch5-tree-15", preset_text::kCh5Tree15},
  };
  return table;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : presets()) out.push_back(name);
  return out;
}

inline std::string preset_yaml(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("preset", "unknown preset '" + name + "'; available: " + known);
  }
  return it->second;
}

inline ScenarioConfig load_preset(const std::string& name) {
  return load_config_string(preset_yaml(name));
}

}  // namespace snow

#endif  // SNOW_PRESETS_HPP_
