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

#ifndef SNOW_PHY_OFDM_HPP_
#define SNOW_PHY_OFDM_HPP_

// D-OFDM at the base station: one m-point inverse transform builds the whole
// downlink, one m-point forward transform per chip period (G-FFT) reads every
// uplink subcarrier at once.
//
// Subcarrier k sits on bin (k + 1) * b (mod m) with b = max(1, m / (n + 1)),
// so bin spacing is spacing_hz / b and the sample rate is m * spacing_hz / b.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "snow/error.hpp"
#include "snow/fft.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/spectrum.hpp"

namespace snow::phy {

inline constexpr std::size_t kDefaultFftSize = 64;

class OfdmGeometry {
 public:
  OfdmGeometry(const SubcarrierPlan& plan, std::size_t fft_size)
      : fft_size_(fft_size), subcarriers_(plan.size()) {
    if (fft_size < plan.size()) throw Error("FFT size must be at least the subcarrier count");
    bins_per_spacing_ = std::max<std::size_t>(1, fft_size / (plan.size() + 1));
    sample_rate_hz_ = static_cast<double>(fft_size) *
                      static_cast<double>(plan.spacing_hz()) /
                      static_cast<double>(bins_per_spacing_);
  }

  std::size_t fft_size() const { return fft_size_; }
  std::size_t bins_per_spacing() const { return bins_per_spacing_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double bin_spacing_hz() const { return sample_rate_hz_ / static_cast<double>(fft_size_); }

  std::size_t center_bin(SubcarrierId id) const {
    if (id.index >= subcarriers_) throw Error("subcarrier outside geometry");
    return ((id.index + 1) * bins_per_spacing_) % fft_size_;
  }

  // Baseband offset of the subcarrier center from the band start.
  double center_offset_hz(SubcarrierId id) const {
    return static_cast<double>(center_bin(id)) * bin_spacing_hz();
  }

 private:
  std::size_t fft_size_;
  std::size_t subcarriers_;
  std::size_t bins_per_spacing_ = 1;
  double sample_rate_hz_ = 0.0;
};

using SymbolMap = std::map<SubcarrierId, cd>;

// One chip period of downlink: each keyed subcarrier's symbol placed on its
// center bin, then inverse-transformed. Output samples have magnitude
// `amplitude` per active tone.
inline BasebandBuffer bs_ofdm_encode(const SymbolMap& symbols, const SubcarrierPlan& plan,
                                     std::size_t fft_size, double amplitude, Fft& ifft) {
  const OfdmGeometry geo(plan, fft_size);
  if (ifft.size() != fft_size) throw Error("IFFT size mismatch");
  std::vector<cd> v(fft_size);
  for (const auto& [id, symbol] : symbols) {
    if (!plan.usable(id)) throw Error("cannot encode on an unusable subcarrier");
    v[geo.center_bin(id)] = symbol * amplitude;
  }
  BasebandBuffer out;
  out.sample_rate_hz = geo.sample_rate_hz();
  out.samples.resize(fft_size);
  ifft.execute(v, out.samples);
  return out;
}

inline BasebandBuffer bs_ofdm_encode(const SymbolMap& symbols, const SubcarrierPlan& plan,
                                     std::size_t fft_size, double amplitude) {
  Fft ifft(fft_size, Fft::Direction::kInverse);
  return bs_ofdm_encode(symbols, plan, fft_size, amplitude, ifft);
}

enum class WindowKind { kNone, kBlackmanHarris };

// 4-term Blackman-Harris (periodic form).
inline std::vector<double> make_window(WindowKind kind, std::size_t m) {
  std::vector<double> w(m, 1.0);
  if (kind == WindowKind::kBlackmanHarris) {
    constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
    for (std::size_t n = 0; n < m; ++n) {
      const double x = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(m);
      w[n] = a0 - a1 * std::cos(x) + a2 * std::cos(2 * x) - a3 * std::cos(3 * x);
    }
  }
  return w;
}

struct BinReading {
  double magnitude = 0.0;  // raw |X_k|
  double phase_deg = 0.0;
  cd value{};
  bool usable = true;
};

using TickOutput = std::vector<BinReading>;

// The base station's receive transform. Holds one forward plan and counts
// how many transforms it has run.
class GfftReceiver {
 public:
  GfftReceiver(const SubcarrierPlan& plan, std::size_t fft_size,
               WindowKind window = WindowKind::kNone)
      : plan_(plan),
        geo_(plan, fft_size),
        fft_(fft_size, Fft::Direction::kForward),
        window_(make_window(window, fft_size)),
        scratch_(fft_size),
        spectrum_(fft_size) {}

  const OfdmGeometry& geometry() const { return geo_; }
  std::uint64_t transforms() const { return fft_.executions(); }

  TickOutput tick(std::span<const cd> samples) {
    if (samples.size() != geo_.fft_size()) throw Error("G-FFT window length must equal m");
    for (std::size_t n = 0; n < samples.size(); ++n) scratch_[n] = samples[n] * window_[n];
    fft_.execute(scratch_, spectrum_);
    TickOutput out(plan_.size());
    for (std::size_t k = 0; k < plan_.size(); ++k) {
      const cd v = spectrum_[geo_.center_bin({k})];
      out[k].value = v;
      out[k].magnitude = std::abs(v);
      out[k].phase_deg = std::arg(v) * 180.0 / std::numbers::pi;
      out[k].usable = plan_.usable({k});
    }
    return out;
  }

  // Full spectrum of the last tick, for leakage inspection.
  std::span<const cd> last_spectrum() const { return spectrum_; }

 private:
  SubcarrierPlan plan_;
  OfdmGeometry geo_;
  Fft fft_;
  std::vector<double> window_;
  std::vector<cd> scratch_;
  std::vector<cd> spectrum_;
};

inline TickOutput gfft_tick(std::span<const cd> window, const SubcarrierPlan& plan,
                            WindowKind window_fn = WindowKind::kNone) {
  GfftReceiver rx(plan, window.size(), window_fn);
  return rx.tick(window);
}

}  // namespace snow::phy

#endif  // SNOW_PHY_OFDM_HPP_
