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

#ifndef SNOW_SIM_MOBILITY_HPP_
#define SNOW_SIM_MOBILITY_HPP_

#include <cmath>

#include "snow/error.hpp"
#include "snow/mac/allocation.hpp"

namespace snow::sim {

struct MobilityStep {
  mac::Position position;
  double speed_mps = 0.0;
  double theta_rad = 0.0;  // between the heading and the line to the BS
  double displacement_m = 0.0;
};

// Straight-line motion for `dt_s` seconds along `heading_rad` (0 = +x).
inline MobilityStep mobility_step(mac::Position from, double speed_mps, double heading_rad,
                                  double dt_s, mac::Position bs) {
  if (speed_mps < 0.0) throw Error("speed must be non-negative");
  MobilityStep s;
  s.speed_mps = speed_mps;
  s.displacement_m = speed_mps * dt_s;
  s.position = {from.x + s.displacement_m * std::cos(heading_rad),
                from.y + s.displacement_m * std::sin(heading_rad)};
  const double to_bs = std::atan2(bs.y - s.position.y, bs.x - s.position.x);
  s.theta_rad = heading_rad - to_bs;
  return s;
}

}  // namespace snow::sim

#endif  // SNOW_SIM_MOBILITY_HPP_
