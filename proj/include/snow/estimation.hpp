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

#ifndef SNOW_ESTIMATION_HPP_
#define SNOW_ESTIMATION_HPP_

// Receiver-side estimation from a known preamble: carrier frequency offset
// (short/long split, coarse then fine), least-squares flat-fading CSI, and
// CFO counter-rotation.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "snow/error.hpp"
#include "snow/fft.hpp"
#include "snow/phy/modulation.hpp"

namespace snow::estimation {

struct CfoEstimate {
  double coarse_hz = 0.0;
  double fine_hz = 0.0;
  double ppm = 0.0;  // 1e6 * fine_hz / join frequency
};

struct CfoOptions {
  double sample_rate_hz = 0.0;
  std::size_t lag_samples = 1;  // one chip period by default
  double join_frequency_hz = 0.0;
  // Lag for the refinement over the long section; 0 reuses lag_samples. Once
  // the coarse offset is removed a longer lag is safe from wrapping as long
  // as the coarse error stays under fs / (2 * fine lag).
  std::size_t fine_lag_samples = 0;
};

namespace detail {

// -arg(sum z[t - lag] z*[t]) / (2 pi lag / fs) over t in [begin + lag, end).
inline double lag_estimate(std::span<const cd> z, std::size_t begin, std::size_t end,
                           std::size_t lag, double fs) {
  if (end <= begin + lag) throw Error("preamble section shorter than the estimator lag");
  cd acc{};
  for (std::size_t t = begin + lag; t < end; ++t) acc += z[t - lag] * std::conj(z[t]);
  if (acc == cd{}) throw Error("degenerate preamble");
  return -std::arg(acc) * fs / (2.0 * std::numbers::pi * static_cast<double>(lag));
}

}  // namespace detail

// `rx` starts at the first preamble sample; `known` is the transmitted
// preamble. The modulation is stripped by multiplying with conj(known), so
// only the channel's phase ramp remains. The first quarter yields the coarse
// offset; the remaining three quarters, corrected by it, refine it.
inline CfoEstimate estimate_cfo(std::span<const cd> rx, std::span<const cd> known,
                                const CfoOptions& opt) {
  if (rx.size() != known.size()) throw Error("received and known preambles differ in length");
  if (rx.empty() || rx.size() % 4 != 0) throw Error("preamble length must be divisible by 4");
  if (!(opt.sample_rate_hz > 0.0)) throw Error("sample rate must be positive");
  if (opt.lag_samples == 0) throw Error("lag must be positive");

  std::vector<cd> z(rx.size());
  for (std::size_t t = 0; t < rx.size(); ++t) z[t] = rx[t] * std::conj(known[t]);

  const std::size_t split = rx.size() / 4;
  CfoEstimate est;
  est.coarse_hz = detail::lag_estimate(z, 0, split, opt.lag_samples, opt.sample_rate_hz);

  const double w = 2.0 * std::numbers::pi * est.coarse_hz / opt.sample_rate_hz;
  for (std::size_t t = split; t < z.size(); ++t) {
    z[t] *= std::polar(1.0, -w * static_cast<double>(t));
  }
  const std::size_t fine_lag = opt.fine_lag_samples ? opt.fine_lag_samples : opt.lag_samples;
  const double residual =
      detail::lag_estimate(z, split, z.size(), fine_lag, opt.sample_rate_hz);
  est.fine_hz = est.coarse_hz + residual;
  if (opt.join_frequency_hz > 0.0) est.ppm = 1e6 * est.fine_hz / opt.join_frequency_hz;
  return est;
}

// Offset expected on another subcarrier from the same oscillator error.
inline double scale_cfo(const CfoEstimate& est, double join_frequency_hz,
                        double assigned_frequency_hz) {
  if (!(join_frequency_hz > 0.0) || !(assigned_frequency_hz > 0.0)) {
    throw Error("frequencies must be positive");
  }
  return est.fine_hz * (assigned_frequency_hz / join_frequency_hz);
}

// Multiplies sample t by e^{-j2pi df t / fs}.
inline phy::BasebandBuffer compensate_cfo(const phy::BasebandBuffer& buffer, double cfo_hz) {
  phy::BasebandBuffer out = buffer;
  const double w = 2.0 * std::numbers::pi * cfo_hz / buffer.sample_rate_hz;
  for (std::size_t t = 0; t < out.samples.size(); ++t) {
    out.samples[t] *= std::polar(1.0, -w * static_cast<double>(t));
  }
  return out;
}

struct CsiEstimate {
  cd h_hat{};
};

// Splits a preamble into `segments` equal parts.
inline std::vector<std::vector<cd>> split_segments(std::span<const cd> preamble,
                                                   std::size_t segments) {
  if (segments == 0) throw Error("need at least one preamble segment");
  if (preamble.size() % segments != 0) throw Error("preamble not divisible into segments");
  const std::size_t len = preamble.size() / segments;
  std::vector<std::vector<cd>> out;
  for (std::size_t s = 0; s < segments; ++s) {
    out.emplace_back(preamble.begin() + s * len, preamble.begin() + (s + 1) * len);
  }
  return out;
}

// Least-squares scalar gain for Y = hP + W:
//   h = sum_i <y_i, p_i> / sum_i |p_i|^2.
inline CsiEstimate estimate_csi(const std::vector<std::vector<cd>>& rx_segments,
                                const std::vector<std::vector<cd>>& known_segments) {
  if (rx_segments.empty()) throw Error("need at least one preamble segment");
  if (rx_segments.size() != known_segments.size()) throw Error("segment count mismatch");
  cd num{};
  double den = 0.0;
  for (std::size_t i = 0; i < rx_segments.size(); ++i) {
    const auto& y = rx_segments[i];
    const auto& p = known_segments[i];
    if (y.size() != p.size()) throw Error("segment length mismatch");
    for (std::size_t t = 0; t < y.size(); ++t) {
      num += y[t] * std::conj(p[t]);
      den += std::norm(p[t]);
    }
  }
  if (den == 0.0) throw Error("zero-energy known preamble");
  return {num / den};
}

}  // namespace snow::estimation

#endif  // SNOW_ESTIMATION_HPP_
