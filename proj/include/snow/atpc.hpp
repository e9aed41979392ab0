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

#ifndef SNOW_ATPC_HPP_
#define SNOW_ATPC_HPP_

// Adaptive transmission power control. Each node fits PDR = a * tp + b by
// least squares over a probe burst, picks the level that just meets the PDR
// threshold, and then tracks the intercept b from delivery feedback while
// keeping the slope fixed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "snow/error.hpp"

namespace snow::atpc {

struct PowerModel {
  double a_hat = 0.0;  // PDR points per dBm
  double b_hat = 0.0;  // PDR intercept
  std::vector<double> tp_levels;  // dBm, strictly increasing
  double pdr_threshold = 90.0;    // percent
  // Set when the fitted slope is non-physical (<= 0); selection then pins
  // the highest level.
  bool degenerate = false;

  bool operator==(const PowerModel&) const = default;
};

inline void validate_levels(std::span<const double> levels) {
  if (levels.empty()) throw Error("power level list is empty");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw Error("power levels must be strictly increasing");
  }
}

inline PowerModel fit_initial(std::span<const double> tp, std::span<const double> pdr,
                              std::vector<double> tp_levels, double pdr_threshold) {
  if (tp.size() != pdr.size()) throw Error("power and PDR sample counts differ");
  if (tp.size() < 2) throw Error("need at least two power samples");
  const double m = static_cast<double>(tp.size());
  double s_tp = 0, s_l = 0, s_tp2 = 0, s_ltp = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    s_tp += tp[i];
    s_l += pdr[i];
    s_tp2 += tp[i] * tp[i];
    s_ltp += tp[i] * pdr[i];
  }
  const double den = m * s_tp2 - s_tp * s_tp;
  // Relative guard: the denominator is m * sum (tp - mean)^2.
  if (!(std::abs(den) > 1e-12 * std::max(1.0, m * s_tp2))) {
    throw Error("collinear power samples");
  }
  validate_levels(tp_levels);
  PowerModel model;
  model.a_hat = (m * s_ltp - s_l * s_tp) / den;
  model.b_hat = (s_l * s_tp2 - s_ltp * s_tp) / den;
  model.tp_levels = std::move(tp_levels);
  model.pdr_threshold = pdr_threshold;
  model.degenerate = !(model.a_hat > 0.0);
  return model;
}

// Levels default to the distinct probed powers.
inline PowerModel fit_initial(std::span<const double> tp, std::span<const double> pdr,
                              double pdr_threshold = 90.0) {
  std::vector<double> levels(tp.begin(), tp.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return fit_initial(tp, pdr, std::move(levels), pdr_threshold);
}

// Unrounded power the model asks for.
inline double raw_power(const PowerModel& model) {
  return (model.pdr_threshold - model.b_hat) / model.a_hat;
}

// Nearest level to the raw power, clamped to the ends of the level list.
// Equidistant raw values resolve to the higher level.
inline double select_power(const PowerModel& model) {
  validate_levels(model.tp_levels);
  if (model.degenerate) return model.tp_levels.back();
  const double raw = raw_power(model);
  double best = model.tp_levels.front();
  double best_gap = std::abs(raw - best);
  for (double level : model.tp_levels) {
    const double gap = std::abs(raw - level);
    if (gap <= best_gap) {
      best = level;
      best_gap = gap;
    }
  }
  return best;
}

// One feedback round: b <- b - (threshold - mean(readings)).
inline PowerModel update_model(PowerModel model, std::span<const double> readings) {
  if (readings.empty()) throw Error("need at least one PDR reading");
  const double mean =
      std::accumulate(readings.begin(), readings.end(), 0.0) / static_cast<double>(readings.size());
  model.b_hat -= model.pdr_threshold - mean;
  return model;
}

// What should cause a node to re-run power selection.
struct TriggerPolicy {
  double displacement_m = 50.0;
  double pdr_margin = 5.0;
};

inline bool should_update(const TriggerPolicy& policy, const PowerModel& model,
                          bool reassigned, double displacement_m, double windowed_pdr) {
  return reassigned || displacement_m > policy.displacement_m ||
         windowed_pdr < model.pdr_threshold - policy.pdr_margin;
}

}  // namespace snow::atpc

#endif  // SNOW_ATPC_HPP_
