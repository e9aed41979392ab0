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

#ifndef SNOW_PHY_PAPR_HPP_
#define SNOW_PHY_PAPR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "snow/error.hpp"
#include "snow/fft.hpp"
#include "snow/phy/modulation.hpp"

namespace snow::phy {

// 10 log10(max |x|^2 / mean |x|^2).
inline double compute_papr(std::span<const cd> samples) {
  if (samples.empty()) throw Error("PAPR of an empty buffer");
  double peak = 0.0, sum = 0.0;
  for (const cd& x : samples) {
    const double p = std::norm(x);
    peak = std::max(peak, p);
    sum += p;
  }
  if (sum == 0.0) throw Error("PAPR of an all-zero buffer");
  const double mean = sum / static_cast<double>(samples.size());
  // Constant envelopes can round a hair under the mean.
  return std::max(0.0, 10.0 * std::log10(peak / mean));
}

inline double compute_papr(const BasebandBuffer& buffer) { return compute_papr(buffer.samples); }

// PAPR of `frames` random BPSK symbols spread over `subcarriers` contiguous
// bins of an (subcarriers * oversample)-point inverse transform.
inline std::vector<double> bpsk_papr_samples(std::size_t subcarriers, std::size_t frames,
                                             std::uint64_t seed, std::size_t oversample = 1) {
  if (subcarriers == 0 || oversample == 0) throw Error("empty PAPR experiment");
  const std::size_t m = subcarriers * oversample;
  Fft ifft(m, Fft::Direction::kInverse);
  std::mt19937_64 rng(seed);
  std::vector<cd> bins(m), time(m);
  std::vector<double> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < subcarriers; ++k) {
      // Centered occupancy keeps the oversampled band contiguous.
      const std::size_t bin = k < subcarriers / 2 ? k : m - subcarriers + k;
      bins[bin] = (rng() & 1u) ? cd{1.0, 0.0} : cd{-1.0, 0.0};
    }
    ifft.execute(bins, time);
    out.push_back(compute_papr(time));
  }
  return out;
}

// Smallest observed level z with P(PAPR > z) <= probability.
inline double papr_tail(std::vector<double> samples, double probability) {
  if (samples.empty()) throw Error("no PAPR samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  const auto allowed = static_cast<std::size_t>(std::floor(probability * n));
  const std::size_t idx = samples.size() - 1 - std::min(allowed, samples.size() - 1);
  return samples[idx];
}

}  // namespace snow::phy

#endif  // SNOW_PHY_PAPR_HPP_
