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

#ifndef SNOW_CHANNEL_HPP_
#define SNOW_CHANNEL_HPP_

// Synthetic uplink channel: log-distance path loss, flat fading, carrier
// frequency offset (oscillator + Doppler), receiver AWGN, and superposition
// of asynchronous transmitters at the base station.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "snow/error.hpp"
#include "snow/fft.hpp"
#include "snow/phy/modulation.hpp"

namespace snow::channel {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kDefaultPathLossExponent = 3.2;
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct LinkModel {
  double distance_m = 1.0;
  double path_loss_exponent = kDefaultPathLossExponent;
  double reference_loss_db = 0.0;  // loss at 1 m
  cd fading{1.0, 0.0};
  double cfo_hz = 0.0;
  double doppler_hz = 0.0;
  double snr_db = kNoiseless;

  void validate() const {
    if (!(distance_m > 0.0)) throw Error("link distance must be positive");
    if (path_loss_exponent < 1.6 || path_loss_exponent > 6.0) {
      throw Error("path loss exponent outside [1.6, 6]");
    }
  }
};

inline double path_loss_db(double distance_m, const LinkModel& model) {
  if (!(distance_m > 0.0)) throw Error("path loss distance must be positive");
  return model.reference_loss_db + 10.0 * model.path_loss_exponent * std::log10(distance_m);
}

// Free-space loss at 1 m for a carrier, a sensible reference_loss_db.
inline double free_space_reference_db(double carrier_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * carrier_hz / kSpeedOfLight);
}

inline double doppler_shift_hz(double carrier_hz, double speed_mps, double theta_rad) {
  if (std::abs(speed_mps) >= kSpeedOfLight) throw Error("speed must be below c");
  return carrier_hz * (speed_mps / kSpeedOfLight) * std::cos(theta_rad);
}

// Linear amplitude gain of a link, fading included.
inline cd link_gain(const LinkModel& link) {
  const double g = std::pow(10.0, -path_loss_db(link.distance_m, link) / 20.0);
  return link.fading * g;
}

struct Contribution {
  phy::BasebandBuffer signal;
  std::size_t start_offset = 0;
  LinkModel link;
};

struct Superposition {
  std::vector<Contribution> contributions;
};

// Adds circularly-symmetric Gaussian noise of total variance `noise_power`.
template <typename Rng>
void add_awgn(std::vector<cd>& samples, double noise_power, Rng& rng) {
  if (!(noise_power > 0.0)) return;
  std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2.0));
  for (auto& s : samples) s += cd{n(rng), n(rng)};
}

// Received baseband at the BS:
//   y[t] = sum_k h_k g_k x_k[t - o_k] e^{j2pi (df_k + dfd_k)(t - o_k)/fs} + w[t]
// The noise power is referenced to the strongest contribution's mean received
// power at that contribution's SNR.
inline phy::BasebandBuffer propagate(const Superposition& sup, std::uint64_t seed,
                                     std::size_t out_len, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be positive");
  phy::BasebandBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.assign(out_len, cd{});

  double strongest = 0.0;
  double strongest_snr = kNoiseless;
  for (const auto& c : sup.contributions) {
    c.link.validate();
    if (c.start_offset + c.signal.samples.size() > out_len) {
      throw Error("contribution overflows the output buffer");
    }
    const cd g = link_gain(c.link);
    const double w = 2.0 * std::numbers::pi * (c.link.cfo_hz + c.link.doppler_hz) / sample_rate_hz;
    double energy = 0.0;
    for (std::size_t n = 0; n < c.signal.samples.size(); ++n) {
      const cd v = g * c.signal.samples[n] * std::polar(1.0, w * static_cast<double>(n));
      out.samples[c.start_offset + n] += v;
      energy += std::norm(v);
    }
    const double mean = c.signal.samples.empty()
                            ? 0.0
                            : energy / static_cast<double>(c.signal.samples.size());
    if (mean > strongest) {
      strongest = mean;
      strongest_snr = c.link.snr_db;
    }
  }
  if (std::isfinite(strongest_snr) && strongest > 0.0) {
    std::mt19937_64 rng(seed);
    add_awgn(out.samples, strongest / std::pow(10.0, strongest_snr / 10.0), rng);
  }
  return out;
}

}  // namespace snow::channel

#endif  // SNOW_CHANNEL_HPP_
