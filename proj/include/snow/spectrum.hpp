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

#ifndef SNOW_SPECTRUM_HPP_
#define SNOW_SPECTRUM_HPP_

// White-space spectrum and subcarrier geometry.
//
// A band [start, end) is split into n overlapping orthogonal subcarriers of
// width w whose centers are spaced w*alpha apart:
//
//   n = floor(W / (w * alpha)) - 1,   center_k = start + (k + 1) * w * alpha
//
// All frequencies are integer Hz so spacing identities hold exactly.
// Subcarriers that touch an occupied range stay in the plan (their index is
// stable) but are flagged unusable.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "snow/error.hpp"

namespace snow {

using Hz = std::int64_t;

struct FrequencyRange {
  Hz start_hz = 0;
  Hz end_hz = 0;

  bool operator==(const FrequencyRange&) const = default;
};

struct SpectrumBand {
  Hz start_hz = 0;
  Hz end_hz = 0;
  // Sorted, non-overlapping, inside [start_hz, end_hz].
  std::vector<FrequencyRange> occupied;

  Hz width_hz() const { return end_hz - start_hz; }

  void validate() const {
    if (end_hz <= start_hz) throw Error("band end must exceed band start");
    Hz cursor = start_hz;
    for (const auto& r : occupied) {
      if (r.end_hz <= r.start_hz) throw Error("empty occupied range");
      if (r.start_hz < cursor || r.end_hz > end_hz) {
        throw Error("occupied ranges must be sorted, disjoint and in-band");
      }
      cursor = r.end_hz;
    }
  }

  bool operator==(const SpectrumBand&) const = default;
};

struct SubcarrierId {
  std::size_t index = 0;

  auto operator<=>(const SubcarrierId&) const = default;
};

class SubcarrierPlan {
 public:
  const SpectrumBand& band() const { return band_; }
  Hz subcarrier_width_hz() const { return width_hz_; }
  double overlap_fraction() const { return overlap_; }
  Hz spacing_hz() const { return spacing_hz_; }
  std::size_t size() const { return centers_.size(); }
  const std::vector<Hz>& centers() const { return centers_; }

  bool contains(SubcarrierId id) const { return id.index < centers_.size(); }

  Hz center(SubcarrierId id) const {
    check(id);
    return centers_[id.index];
  }

  bool usable(SubcarrierId id) const {
    check(id);
    return usable_[id.index];
  }

  std::size_t usable_count() const {
    return static_cast<std::size_t>(
        std::count(usable_.begin(), usable_.end(), true));
  }

  std::vector<SubcarrierId> usable_ids() const {
    std::vector<SubcarrierId> out;
    for (std::size_t i = 0; i < usable_.size(); ++i) {
      if (usable_[i]) out.push_back({i});
    }
    return out;
  }

  // Copy of this plan with `id` additionally marked unusable. Centers and
  // indices do not move.
  SubcarrierPlan without(SubcarrierId id) const {
    check(id);
    SubcarrierPlan copy = *this;
    copy.usable_[id.index] = false;
    return copy;
  }

  // Copy restricted to `keep`; every other subcarrier becomes unusable.
  SubcarrierPlan restricted_to(const std::vector<SubcarrierId>& keep) const {
    SubcarrierPlan copy = *this;
    std::vector<bool> allowed(usable_.size(), false);
    for (auto id : keep) {
      check(id);
      allowed[id.index] = true;
    }
    for (std::size_t i = 0; i < usable_.size(); ++i) {
      copy.usable_[i] = usable_[i] && allowed[i];
    }
    return copy;
  }

  bool operator==(const SubcarrierPlan&) const = default;

 private:
  friend SubcarrierPlan plan_subcarriers(const SpectrumBand&, Hz, double);

  void check(SubcarrierId id) const {
    if (id.index >= centers_.size()) {
      throw Error("subcarrier index " + std::to_string(id.index) +
                  " out of range for a plan of " +
                  std::to_string(centers_.size()));
    }
  }

  SpectrumBand band_;
  Hz width_hz_ = 0;
  double overlap_ = 0.0;
  Hz spacing_hz_ = 0;
  std::vector<Hz> centers_;
  std::vector<bool> usable_;
};

// Number of subcarriers a band of `band_width_hz` holds; 0 when too narrow.
inline std::size_t subcarrier_count(Hz band_width_hz, Hz spacing_hz) {
  if (spacing_hz <= 0) return 0;
  const Hz slots = band_width_hz / spacing_hz;
  return slots > 1 ? static_cast<std::size_t>(slots - 1) : 0;
}

inline SubcarrierPlan plan_subcarriers(const SpectrumBand& band, Hz width_hz,
                                       double overlap) {
  band.validate();
  if (width_hz <= 0) throw Error("subcarrier width must be positive");
  if (!(overlap > 0.0 && overlap <= 0.5)) throw Error("invalid overlap");
  const double spacing = static_cast<double>(width_hz) * overlap;
  const Hz spacing_hz = static_cast<Hz>(spacing + 0.5);
  if (spacing_hz <= 0 || static_cast<double>(spacing_hz) != spacing) {
    throw Error("subcarrier spacing must be a whole number of Hz");
  }
  const std::size_t n = subcarrier_count(band.width_hz(), spacing_hz);
  if (n == 0) throw Error("band too narrow");

  SubcarrierPlan plan;
  plan.band_ = band;
  plan.width_hz_ = width_hz;
  plan.overlap_ = overlap;
  plan.spacing_hz_ = spacing_hz;
  plan.centers_.reserve(n);
  plan.usable_.reserve(n);
  const Hz half = width_hz / 2;
  for (std::size_t k = 0; k < n; ++k) {
    const Hz c = band.start_hz + static_cast<Hz>(k + 1) * spacing_hz;
    const Hz lo = c - half;
    const Hz hi = c + (width_hz - half);
    bool ok = lo >= band.start_hz && hi <= band.end_hz;
    for (const auto& r : band.occupied) {
      if (lo < r.end_hz && r.start_hz < hi) ok = false;
    }
    plan.centers_.push_back(c);
    plan.usable_.push_back(ok);
  }
  return plan;
}

inline Hz subcarrier_center(const SubcarrierPlan& plan, SubcarrierId id) {
  return plan.center(id);
}

}  // namespace snow

#endif  // SNOW_SPECTRUM_HPP_
