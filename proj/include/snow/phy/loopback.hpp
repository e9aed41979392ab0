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

#ifndef SNOW_PHY_LOOPBACK_HPP_
#define SNOW_PHY_LOOPBACK_HPP_

// Asynchronous uplink bench: every usable subcarrier carries one packet that
// starts at a random chip offset; the composite signal goes through one G-FFT
// per tick and the decode matrix.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "snow/channel.hpp"
#include "snow/phy/decoder.hpp"
#include "snow/phy/framing.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"
#include "snow/rng.hpp"

namespace snow::phy {

struct LoopbackOptions {
  ModulationScheme scheme;
  std::size_t fft_size = kDefaultFftSize;
  WindowKind window = WindowKind::kNone;
  std::size_t trials = 100;
  std::size_t payload_bytes = 28;
  std::size_t max_offset_chips = 64;  // start offsets drawn from [0, max]
  std::optional<double> snr_db;       // per-sample SNR; unset for noiseless
  std::uint64_t seed = 1;
};

struct LoopbackResult {
  std::uint64_t packets = 0;
  std::uint64_t delivered = 0;  // CRC pass and bit-exact
  std::uint64_t crc_failures = 0;
  std::uint64_t missed = 0;     // nothing decoded on the subcarrier
  std::uint64_t bit_errors = 0; // payload bits, over frames that came out
  std::uint64_t ticks = 0;
  std::uint64_t transforms = 0;

  double prr() const {
    return packets ? static_cast<double>(delivered) / static_cast<double>(packets) : 0.0;
  }
};

inline LoopbackResult run_loopback(const SubcarrierPlan& plan, const LoopbackOptions& opt) {
  opt.scheme.validate();
  const OfdmGeometry geo(plan, opt.fft_size);
  const std::size_t m = opt.fft_size;
  const int r = opt.scheme.spreading_factor;
  const auto ids = plan.usable_ids();

  std::vector<std::vector<cd>> tones(plan.size(), std::vector<cd>(m));
  for (auto id : ids) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(geo.center_bin(id)) /
                     static_cast<double>(m);
    for (std::size_t n = 0; n < m; ++n) tones[id.index][n] = std::polar(1.0, w * static_cast<double>(n));
  }
  const double amp = opt.snr_db ? std::sqrt(std::pow(10.0, *opt.snr_db / 10.0)) : 1.0;

  Rng rng = make_rng(opt.seed, 0x100B);
  Rng noise = make_rng(opt.seed, 0x100C);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> offset(0, opt.max_offset_chips);

  GfftReceiver rx(plan, m, opt.window);
  LoopbackResult res;
  std::vector<cd> win(m);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    struct Tx {
      Packet packet;
      Bits chips;
      std::size_t start;
    };
    std::vector<Tx> txs;
    std::size_t end = 0;
    for (auto id : ids) {
      std::vector<std::uint8_t> payload(opt.payload_bytes);
      for (auto& b : payload) b = static_cast<std::uint8_t>(byte(rng));
      Tx tx{frame_packet(payload, static_cast<std::uint8_t>(id.index), id), {}, offset(rng)};
      tx.chips = packet_chips(tx.packet, r);
      end = std::max(end, tx.start + tx.chips.size());
      txs.push_back(std::move(tx));
    }
    DecodeMatrix matrix(plan.size(), m, kDefaultSyncWord);
    std::vector<std::optional<DecodedFrame>> got(plan.size());
    for (std::size_t t = 0; t < end + 1; ++t) {
      std::fill(win.begin(), win.end(), cd{});
      for (const auto& tx : txs) {
        if (t < tx.start || t >= tx.start + tx.chips.size()) continue;
        const cd sym = chip_symbol(tx.chips[t - tx.start], opt.scheme.kind) * amp;
        if (sym == cd{}) continue;
        const auto& tone = tones[tx.packet.subcarrier.index];
        for (std::size_t n = 0; n < m; ++n) win[n] += sym * tone[n];
      }
      if (opt.snr_db) channel::add_awgn(win, 1.0, noise);
      for (auto& f : decode_step(matrix, rx.tick(win), opt.scheme)) {
        if (!got[f.packet.subcarrier.index]) got[f.packet.subcarrier.index] = std::move(f);
      }
      ++res.ticks;
    }
    for (const auto& tx : txs) {
      ++res.packets;
      const auto& f = got[tx.packet.subcarrier.index];
      if (!f) {
        ++res.missed;
        continue;
      }
      if (!f->crc_ok) ++res.crc_failures;
      const auto& a = f->packet.payload;
      const auto& b = tx.packet.payload;
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::uint8_t x = i < a.size() ? a[i] : static_cast<std::uint8_t>(~b[i]);
        res.bit_errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(x ^ b[i])));
      }
      if (f->crc_ok && a == b && f->packet.src == tx.packet.src) ++res.delivered;
    }
  }
  res.transforms = rx.transforms();
  return res;
}

}  // namespace snow::phy

#endif  // SNOW_PHY_LOOPBACK_HPP_
