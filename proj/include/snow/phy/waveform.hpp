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

#ifndef SNOW_PHY_WAVEFORM_HPP_
#define SNOW_PHY_WAVEFORM_HPP_

// Waveform dump format, all fields little-endian:
//
//   offset  size  field
//   0       8     magic "SNOWWAV1"
//   8       8     sample rate (float64, Hz)
//   16      4     FFT size m (uint32)
//   20      4     reserved, zero
//   24      8     plan hash (uint64, FNV-1a, see plan_hash)
//   32      8     sample count N (uint64)
//   40      8N    N pairs of (i, q) float32

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "snow/error.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/spectrum.hpp"

namespace snow::phy {

static_assert(std::endian::native == std::endian::little,
              "waveform dumps assume a little-endian host");

inline constexpr char kWaveformMagic[8] = {'S', 'N', 'O', 'W', 'W', 'A', 'V', '1'};

inline std::uint64_t plan_hash(const SubcarrierPlan& plan) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(plan.band().start_hz));
  mix(static_cast<std::uint64_t>(plan.band().end_hz));
  mix(static_cast<std::uint64_t>(plan.subcarrier_width_hz()));
  mix(static_cast<std::uint64_t>(plan.spacing_hz()));
  for (std::size_t k = 0; k < plan.size(); ++k) mix(plan.usable({k}) ? 1 : 0);
  return h;
}

struct WaveformHeader {
  double sample_rate_hz = 0.0;
  std::uint32_t fft_size = 0;
  std::uint64_t plan_hash = 0;

  bool operator==(const WaveformHeader&) const = default;
};

namespace detail {
template <typename T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw Error("truncated waveform dump");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}
}  // namespace detail

inline void write_waveform(std::ostream& os, const WaveformHeader& header,
                           const BasebandBuffer& buffer) {
  os.write(kWaveformMagic, sizeof kWaveformMagic);
  detail::put<double>(os, header.sample_rate_hz);
  detail::put<std::uint32_t>(os, header.fft_size);
  detail::put<std::uint32_t>(os, 0);
  detail::put<std::uint64_t>(os, header.plan_hash);
  detail::put<std::uint64_t>(os, buffer.samples.size());
  for (const cd& s : buffer.samples) {
    detail::put<float>(os, static_cast<float>(s.real()));
    detail::put<float>(os, static_cast<float>(s.imag()));
  }
  if (!os) throw Error("failed to write waveform dump");
}

inline BasebandBuffer read_waveform(std::istream& is, WaveformHeader* header = nullptr) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kWaveformMagic, 8) != 0) {
    throw Error("not a waveform dump");
  }
  WaveformHeader h;
  h.sample_rate_hz = detail::get<double>(is);
  h.fft_size = detail::get<std::uint32_t>(is);
  (void)detail::get<std::uint32_t>(is);
  h.plan_hash = detail::get<std::uint64_t>(is);
  const auto n = detail::get<std::uint64_t>(is);
  BasebandBuffer buf;
  buf.sample_rate_hz = h.sample_rate_hz;
  buf.samples.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float re = detail::get<float>(is);
    const float im = detail::get<float>(is);
    buf.samples.emplace_back(re, im);
  }
  if (header != nullptr) *header = h;
  return buf;
}

}  // namespace snow::phy

#endif  // SNOW_PHY_WAVEFORM_HPP_
