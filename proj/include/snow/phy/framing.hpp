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

#ifndef SNOW_PHY_FRAMING_HPP_
#define SNOW_PHY_FRAMING_HPP_

// Over-the-air frame layout (most significant bit first):
//
//   preamble (32) | sync word (32) | length (8) | source (8) | payload | CRC (16)
//
// The CRC is CRC-16/CCITT-FALSE over length, source and payload. The fixed
// overhead is 12 bytes, so a 28-byte payload yields a 40-byte frame.

#include <boost/crc.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snow/error.hpp"
#include "snow/spectrum.hpp"

namespace snow::phy {

using Bit = std::uint8_t;
using Bits = std::vector<Bit>;

inline constexpr std::uint32_t kPreamble = 0xAAAAAAAAu;  // 1010...
inline constexpr std::uint32_t kDefaultSyncWord = 0x930B51DEu;
inline constexpr std::size_t kMaxPayloadBytes = 255;
inline constexpr std::size_t kFrameOverheadBytes = 12;
inline constexpr std::size_t kHeaderBits = 32 + 32;  // preamble + sync

struct Packet {
  std::uint32_t preamble = kPreamble;
  std::uint32_t sync_word = kDefaultSyncWord;
  std::vector<std::uint8_t> payload;
  std::uint16_t crc = 0;
  std::uint8_t src = 0;
  SubcarrierId subcarrier{};

  std::size_t payload_len() const { return payload.size(); }
  std::size_t frame_bytes() const { return payload.size() + kFrameOverheadBytes; }

  bool operator==(const Packet&) const = default;
};

inline std::uint16_t crc16_ccitt(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<16, 0x1021, 0xFFFF, 0, false, false> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return static_cast<std::uint16_t>(crc.checksum());
}

namespace detail {
inline std::vector<std::uint8_t> crc_input(std::uint8_t src,
                                           std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> buf;
  buf.reserve(payload.size() + 2);
  buf.push_back(static_cast<std::uint8_t>(payload.size()));
  buf.push_back(src);
  buf.insert(buf.end(), payload.begin(), payload.end());
  return buf;
}

inline void push_bits(Bits& out, std::uint64_t value, int width) {
  for (int b = width - 1; b >= 0; --b) out.push_back((value >> b) & 1u);
}

inline std::uint64_t read_bits(std::span<const Bit> bits, std::size_t pos, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) v = (v << 1) | (bits[pos + b] & 1u);
  return v;
}
}  // namespace detail

inline Packet frame_packet(std::span<const std::uint8_t> payload, std::uint8_t src,
                           SubcarrierId subcarrier,
                           std::uint32_t sync_word = kDefaultSyncWord) {
  if (payload.size() > kMaxPayloadBytes) throw Error("payload exceeds 255 bytes");
  Packet p;
  p.sync_word = sync_word;
  p.payload.assign(payload.begin(), payload.end());
  p.src = src;
  p.subcarrier = subcarrier;
  p.crc = crc16_ccitt(detail::crc_input(src, p.payload));
  return p;
}

inline bool crc_ok(const Packet& p) {
  return p.payload.size() <= kMaxPayloadBytes &&
         p.crc == crc16_ccitt(detail::crc_input(p.src, p.payload));
}

// Serialized frame bytes including preamble and sync word.
inline std::vector<std::uint8_t> frame_bytes(const Packet& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.frame_bytes());
  for (int s = 24; s >= 0; s -= 8) out.push_back((p.preamble >> s) & 0xFF);
  for (int s = 24; s >= 0; s -= 8) out.push_back((p.sync_word >> s) & 0xFF);
  out.push_back(static_cast<std::uint8_t>(p.payload.size()));
  out.push_back(p.src);
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  out.push_back(p.crc >> 8);
  out.push_back(p.crc & 0xFF);
  return out;
}

inline Bits frame_bits(const Packet& p) {
  Bits bits;
  const auto bytes = frame_bytes(p);
  bits.reserve(bytes.size() * 8);
  for (auto b : bytes) detail::push_bits(bits, b, 8);
  return bits;
}

struct ParsedFrame {
  Packet packet;
  bool crc_ok = false;
};

// Parses serialized frame bytes. Returns nullopt when the buffer is too short
// or its length field disagrees with the buffer size; CRC mismatches are
// reported through `crc_ok`.
inline std::optional<ParsedFrame> parse_frame(std::span<const std::uint8_t> bytes,
                                              SubcarrierId subcarrier = {}) {
  if (bytes.size() < kFrameOverheadBytes) return std::nullopt;
  const std::size_t len = bytes[8];
  if (bytes.size() != len + kFrameOverheadBytes) return std::nullopt;
  ParsedFrame f;
  auto be32 = [&](std::size_t o) {
    return (std::uint32_t{bytes[o]} << 24) | (std::uint32_t{bytes[o + 1]} << 16) |
           (std::uint32_t{bytes[o + 2]} << 8) | std::uint32_t{bytes[o + 3]};
  };
  f.packet.preamble = be32(0);
  f.packet.sync_word = be32(4);
  f.packet.src = bytes[9];
  f.packet.payload.assign(bytes.begin() + 10, bytes.begin() + 10 + len);
  f.packet.crc = static_cast<std::uint16_t>((bytes[10 + len] << 8) | bytes[11 + len]);
  f.packet.subcarrier = subcarrier;
  f.crc_ok = crc_ok(f.packet);
  return f;
}

inline std::size_t frame_bit_count(std::size_t payload_bytes) {
  return (payload_bytes + kFrameOverheadBytes) * 8;
}

}  // namespace snow::phy

#endif  // SNOW_PHY_FRAMING_HPP_
