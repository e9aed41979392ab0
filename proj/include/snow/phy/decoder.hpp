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

#ifndef SNOW_PHY_DECODER_HPP_
#define SNOW_PHY_DECODER_HPP_

// Per-subcarrier packet decoding over the G-FFT tick stream.
//
// Every subcarrier owns one column of the decode matrix. A column turns each
// tick's bin reading into a chip, despreads on r-chip boundaries, hunts for
// preamble + sync, reads the length/source header and then counts down the
// payload and CRC. Columns never look at each other, which is what lets
// arbitrarily offset transmissions decode side by side.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "snow/phy/framing.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"

namespace snow::phy {

enum class ColumnPhase { kIdle, kHunting, kHeader, kBody };

struct DecodeColumn {
  ColumnPhase phase = ColumnPhase::kIdle;
  Bits chips;  // chips of the bit in progress
  cd reference_sum{};
  double reference_deg = 0.0;
  bool reference_ready = false;
  std::uint64_t shift = 0;
  std::size_t hunted_bits = 0;
  std::size_t quiet_chips = 0;  // consecutive chips below the carrier threshold
  Bits body;
  std::size_t bits_needed = 0;
  std::uint64_t start_tick = 0;

  bool operator==(const DecodeColumn&) const = default;
};

struct DecodedFrame {
  Packet packet;
  bool crc_ok = false;
  std::uint64_t start_tick = 0;
  std::uint64_t end_tick = 0;
};

class DecodeMatrix {
 public:
  DecodeMatrix(std::size_t subcarriers, std::size_t fft_size,
               std::uint32_t sync_word = kDefaultSyncWord)
      : columns_(subcarriers), fft_size_(fft_size), sync_word_(sync_word) {}

  std::size_t size() const { return columns_.size(); }
  const DecodeColumn& column(std::size_t k) const { return columns_.at(k); }
  DecodeColumn& column(std::size_t k) { return columns_.at(k); }
  std::uint64_t ticks() const { return ticks_; }
  std::size_t fft_size() const { return fft_size_; }
  std::uint32_t sync_word() const { return sync_word_; }

  bool all_idle() const {
    for (const auto& c : columns_) {
      if (c.phase != ColumnPhase::kIdle) return false;
    }
    return true;
  }

  void reset_column(std::size_t k) { columns_.at(k) = DecodeColumn{}; }
  void advance() { ++ticks_; }

 private:
  std::vector<DecodeColumn> columns_;
  std::size_t fft_size_;
  std::uint32_t sync_word_;
  std::uint64_t ticks_ = 0;
};

namespace detail {

// Bits of hunting tolerated before a column gives up and returns to idle.
inline constexpr std::size_t kMaxHuntBits = 96;

inline double wrap_deg(double d) {
  d = std::fmod(d + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

inline DecodedFrame assemble(const Bits& body, std::size_t subcarrier,
                             std::uint32_t sync_word, std::uint64_t start,
                             std::uint64_t end) {
  DecodedFrame f;
  const std::size_t len = read_bits(body, 0, 8);
  f.packet.sync_word = sync_word;
  f.packet.src = static_cast<std::uint8_t>(read_bits(body, 8, 8));
  f.packet.payload.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    f.packet.payload[i] = static_cast<std::uint8_t>(read_bits(body, 16 + 8 * i, 8));
  }
  f.packet.crc = static_cast<std::uint16_t>(read_bits(body, 16 + 8 * len, 16));
  f.packet.subcarrier = {subcarrier};
  f.crc_ok = crc_ok(f.packet);
  f.start_tick = start;
  f.end_tick = end;
  return f;
}

}  // namespace detail

// Advances every column by one tick. Returns frames that completed on this
// tick (CRC failures included, flagged).
inline std::vector<DecodedFrame> decode_step(DecodeMatrix& matrix, const TickOutput& tick,
                                             const ModulationScheme& scheme) {
  if (tick.size() != matrix.size()) throw Error("tick output does not match decode matrix");
  const std::size_t r = static_cast<std::size_t>(scheme.spreading_factor);
  const double norm = 1.0 / std::sqrt(static_cast<double>(matrix.fft_size()));
  const std::uint64_t header =
      (std::uint64_t{kPreamble} << 32) | std::uint64_t{matrix.sync_word()};
  const std::uint64_t now = matrix.ticks();
  std::vector<DecodedFrame> done;

  for (std::size_t k = 0; k < matrix.size(); ++k) {
    const BinReading& in = tick[k];
    DecodeColumn& col = matrix.column(k);
    if (!in.usable) {
      if (col.phase != ColumnPhase::kIdle) matrix.reset_column(k);
      continue;
    }
    const bool carrier = in.magnitude * norm >= scheme.amplitude_threshold;
    const bool bpsk = scheme.kind == ModulationKind::kBpsk;

    if (col.phase == ColumnPhase::kIdle) {
      // Every frame opens with a 1 bit, which is a carrier in either scheme.
      if (!carrier) continue;
      col.phase = ColumnPhase::kHunting;
      col.start_tick = now;
    } else if (bpsk) {
      // A lone faded chip is decided on phase like any other; a whole bit
      // of silence means the transmitter is gone.
      col.quiet_chips = carrier ? 0 : col.quiet_chips + 1;
      if (col.quiet_chips >= r) {
        matrix.reset_column(k);
        continue;
      }
    }

    Bit chip = 0;
    const bool first_bit = col.hunted_bits == 0 && col.phase == ColumnPhase::kHunting;
    if (!bpsk) {
      chip = carrier ? 1 : 0;
    } else if (first_bit && !col.reference_ready) {
      // The first preamble bit is a 1: its chips set the phase reference.
      col.reference_sum += in.value;
      chip = 1;
    } else {
      const double dev = detail::wrap_deg(in.phase_deg - col.reference_deg);
      chip = std::abs(dev) <= scheme.phase_threshold_deg ? 1 : 0;
    }
    col.chips.push_back(chip);
    if (col.chips.size() < r) continue;

    const Bit bit = despread_group(col.chips);
    col.chips.clear();
    if (bpsk && !col.reference_ready) {
      col.reference_deg = std::arg(col.reference_sum) * 180.0 / std::numbers::pi;
      col.reference_ready = true;
    }

    switch (col.phase) {
      case ColumnPhase::kHunting:
        col.shift = (col.shift << 1) | bit;
        ++col.hunted_bits;
        if (col.hunted_bits >= kHeaderBits && col.shift == header) {
          col.phase = ColumnPhase::kHeader;
          col.body.clear();
          col.bits_needed = 16;
        } else if (col.hunted_bits > detail::kMaxHuntBits) {
          matrix.reset_column(k);
        }
        break;
      case ColumnPhase::kHeader:
        col.body.push_back(bit);
        if (col.body.size() == col.bits_needed) {
          const std::size_t len = detail::read_bits(col.body, 0, 8);
          col.bits_needed = 16 + 8 * len + 16;
          col.phase = ColumnPhase::kBody;
        }
        break;
      case ColumnPhase::kBody:
        col.body.push_back(bit);
        if (col.body.size() == col.bits_needed) {
          done.push_back(detail::assemble(col.body, k, matrix.sync_word(),
                                          col.start_tick, now));
          matrix.reset_column(k);
        }
        break;
      case ColumnPhase::kIdle:
        break;
    }
  }
  matrix.advance();
  return done;
}

}  // namespace snow::phy

#endif  // SNOW_PHY_DECODER_HPP_
