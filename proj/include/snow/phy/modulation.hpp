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

#ifndef SNOW_PHY_MODULATION_HPP_
#define SNOW_PHY_MODULATION_HPP_

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "snow/error.hpp"
#include "snow/fft.hpp"
#include "snow/phy/framing.hpp"

namespace snow::phy {

struct BasebandBuffer {
  std::vector<cd> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
  bool operator==(const BasebandBuffer&) const = default;
};

enum class ModulationKind { kOok, kBpsk };

struct ModulationScheme {
  ModulationKind kind = ModulationKind::kBpsk;
  int spreading_factor = 8;
  // Compared against |X_k| / sqrt(m), i.e. the unitary-DFT bin magnitude.
  double amplitude_threshold = 3.0;
  double phase_threshold_deg = 90.0;

  void validate() const {
    if (spreading_factor < 1) throw Error("spreading factor must be >= 1");
    if (!(amplitude_threshold > 0.0)) throw Error("amplitude threshold must be positive");
    if (!(phase_threshold_deg > 0.0)) throw Error("phase threshold must be positive");
    if (kind == ModulationKind::kBpsk && phase_threshold_deg > 90.0) {
      throw Error("BPSK phase threshold must not exceed 90 degrees");
    }
  }

  bool operator==(const ModulationScheme&) const = default;
};

inline Bits spread_bits(std::span<const Bit> bits, int r) {
  if (r < 1) throw Error("spreading factor must be >= 1");
  Bits chips;
  chips.reserve(bits.size() * static_cast<std::size_t>(r));
  for (Bit b : bits) chips.insert(chips.end(), static_cast<std::size_t>(r), b ? 1 : 0);
  return chips;
}

// Majority vote per r-chip group; an even split decodes to 0.
inline Bit despread_group(std::span<const Bit> group) {
  std::size_t ones = 0;
  for (Bit c : group) ones += c ? 1 : 0;
  return 2 * ones > group.size() ? 1 : 0;
}

inline Bits despread_bits(std::span<const Bit> chips, int r) {
  if (r < 1) throw Error("spreading factor must be >= 1");
  const auto step = static_cast<std::size_t>(r);
  if (chips.size() % step != 0) throw Error("chip count not divisible by spreading factor");
  Bits bits;
  bits.reserve(chips.size() / step);
  for (std::size_t i = 0; i < chips.size(); i += step) {
    bits.push_back(despread_group(chips.subspan(i, step)));
  }
  return bits;
}

// Complex symbol carried by one chip: OOK is on/off, BPSK is 0 or 180 degrees.
inline cd chip_symbol(Bit chip, ModulationKind kind) {
  if (kind == ModulationKind::kOok) return chip ? cd{1.0, 0.0} : cd{0.0, 0.0};
  return chip ? cd{1.0, 0.0} : cd{-1.0, 0.0};
}

inline std::vector<cd> chip_symbols(std::span<const Bit> chips, ModulationKind kind) {
  std::vector<cd> out;
  out.reserve(chips.size());
  for (Bit c : chips) out.push_back(chip_symbol(c, kind));
  return out;
}

// Spread chips for a whole frame.
inline Bits packet_chips(const Packet& packet, int r) {
  return spread_bits(frame_bits(packet), r);
}

// Narrowband transmitter: each chip becomes `samples_per_chip` samples of a
// unit-amplitude complex tone at `center_offset_hz`, keyed per the scheme.
inline BasebandBuffer modulate_chips(std::span<const Bit> chips, ModulationKind kind,
                                     double center_offset_hz, double sample_rate_hz,
                                     std::size_t samples_per_chip) {
  if (samples_per_chip < 1) throw Error("samples_per_chip must be >= 1");
  if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be positive");
  BasebandBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  buf.samples.resize(chips.size() * samples_per_chip);
  const double w = 2.0 * std::numbers::pi * center_offset_hz / sample_rate_hz;
  std::size_t n = 0;
  for (Bit chip : chips) {
    const cd s = chip_symbol(chip, kind);
    for (std::size_t k = 0; k < samples_per_chip; ++k, ++n) {
      buf.samples[n] = s == cd{} ? cd{} : s * std::polar(1.0, w * static_cast<double>(n));
    }
  }
  return buf;
}

inline BasebandBuffer node_modulate(const Packet& packet, const ModulationScheme& scheme,
                                    double center_offset_hz, double sample_rate_hz,
                                    std::size_t samples_per_chip) {
  scheme.validate();
  const Bits chips = packet_chips(packet, scheme.spreading_factor);
  return modulate_chips(chips, scheme.kind, center_offset_hz, sample_rate_hz,
                        samples_per_chip);
}

}  // namespace snow::phy

#endif  // SNOW_PHY_MODULATION_HPP_
