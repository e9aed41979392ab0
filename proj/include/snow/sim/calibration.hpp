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

#ifndef SNOW_SIM_CALIBRATION_HPP_
#define SNOW_SIM_CALIBRATION_HPP_

// SNR -> chip-error table for the abstract PHY. Each point is measured by
// pushing random chips of one subcarrier through the sample-level receiver
// (tone of amplitude sqrt(snr), unit-power noise, G-FFT, threshold decision).
// Packet errors then follow from the majority-vote despreading rule.
//
// BPSK also records carrier loss: the fraction of chips whose bin falls
// under the amplitude threshold. The decoder needs a loud first chip to open
// a column and drops it after r quiet chips in a row, so at low SNR frames
// die there long before phase errors matter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "snow/channel.hpp"
#include "snow/error.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"
#include "snow/rng.hpp"
#include "snow/spectrum.hpp"

namespace snow::sim {

struct CalibrationTable {
  phy::ModulationKind modulation = phy::ModulationKind::kBpsk;
  std::size_t fft_size = 64;
  std::vector<double> snr_db;
  std::vector<double> chip_error;
  std::vector<double> carrier_loss;  // empty or zero for OOK

  // Linear interpolation, clamped at the ends.
  double chip_error_at(double snr) const { return interpolate(chip_error, snr); }
  double carrier_loss_at(double snr) const {
    return carrier_loss.empty() ? 0.0 : interpolate(carrier_loss, snr);
  }

  double packet_error_at(double snr, int r, std::size_t frame_bits) const;

  bool operator==(const CalibrationTable&) const = default;

 private:
  double interpolate(const std::vector<double>& v, double snr) const {
    if (snr_db.empty()) throw Error("empty calibration table");
    if (std::isinf(snr) && snr > 0) return 0.0;
    if (snr <= snr_db.front()) return v.front();
    if (snr >= snr_db.back()) return v.back();
    const auto it = std::upper_bound(snr_db.begin(), snr_db.end(), snr);
    const std::size_t hi = static_cast<std::size_t>(it - snr_db.begin());
    const double t = (snr - snr_db[hi - 1]) / (snr_db[hi] - snr_db[hi - 1]);
    return v[hi - 1] + t * (v[hi] - v[hi - 1]);
  }
};

// Probability that majority voting over r chips with independent flip
// probability p yields the wrong bit. Ties decode to 0, so they only hurt a
// transmitted 1; with equiprobable bits that is half the tie mass.
inline double bit_error_from_chip_error(double p, int r) {
  if (r < 1) throw Error("spreading factor must be >= 1");
  double ber = 0.0;
  double binom = 1.0;  // C(r, k)
  for (int k = 0; k <= r; ++k) {
    if (k > 0) binom = binom * (r - k + 1) / k;
    const double term = binom * std::pow(p, k) * std::pow(1.0 - p, r - k);
    if (2 * k > r) ber += term;
    if (2 * k == r) ber += 0.5 * term;
  }
  return ber;
}

inline double packet_error(double chip_error, int r, std::size_t frame_bits) {
  const double ber = bit_error_from_chip_error(chip_error, r);
  return 1.0 - std::pow(1.0 - ber, static_cast<double>(frame_bits));
}

// Adds carrier loss q: no run of r quiet chips may occur inside the frame.
// A column that opens a chip or two late is absorbed by the majority vote,
// so the start itself is not charged.
inline double packet_error(double chip_error, double carrier_loss, int r,
                           std::size_t frame_bits) {
  const double clean = 1.0 - packet_error(chip_error, r, frame_bits);
  if (carrier_loss <= 0.0) return 1.0 - clean;
  const double chips = static_cast<double>(frame_bits) * r;
  const double held = std::pow(1.0 - std::pow(carrier_loss, r), chips);
  return 1.0 - clean * held;
}

inline double CalibrationTable::packet_error_at(double snr, int r,
                                                std::size_t frame_bits) const {
  return packet_error(chip_error_at(snr), carrier_loss_at(snr), r, frame_bits);
}

struct CalibrationOptions {
  phy::ModulationScheme scheme;
  std::size_t fft_size = 64;
  double snr_min_db = -30.0;
  double snr_max_db = 0.0;
  double snr_step_db = 1.0;
  std::size_t chips_per_point = 4000;
  std::uint64_t seed = 1;
};

inline CalibrationTable calibrate(const SubcarrierPlan& plan, const CalibrationOptions& opt) {
  if (!(opt.snr_step_db > 0.0) || opt.snr_max_db < opt.snr_min_db) {
    throw Error("invalid SNR grid");
  }
  const auto usable = plan.usable_ids();
  if (usable.empty()) throw Error("plan has no usable subcarriers");
  const SubcarrierId sc = usable[usable.size() / 2];

  phy::GfftReceiver rx(plan, opt.fft_size);
  const auto& geo = rx.geometry();
  const std::size_t m = opt.fft_size;
  const double w = 2.0 * std::numbers::pi * geo.center_offset_hz(sc) / geo.sample_rate_hz();
  const bool bpsk = opt.scheme.kind == phy::ModulationKind::kBpsk;
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));

  CalibrationTable table;
  table.modulation = opt.scheme.kind;
  table.fft_size = m;
  Rng rng = make_rng(opt.seed, 0);
  std::bernoulli_distribution coin(0.5);
  std::vector<cd> window(m);
  const std::size_t points =
      static_cast<std::size_t>(std::floor((opt.snr_max_db - opt.snr_min_db) / opt.snr_step_db + 1e-9)) + 1;
  for (std::size_t pi = 0; pi < points; ++pi) {
    const double snr = opt.snr_min_db + static_cast<double>(pi) * opt.snr_step_db;
    const double amp = std::sqrt(std::pow(10.0, snr / 10.0));
    std::size_t errors = 0;
    std::size_t quiet = 0;
    for (std::size_t c = 0; c < opt.chips_per_point; ++c) {
      const phy::Bit chip = coin(rng) ? 1 : 0;
      const cd s = phy::chip_symbol(chip, opt.scheme.kind) * amp;
      for (std::size_t n = 0; n < m; ++n) window[n] = s * std::polar(1.0, w * static_cast<double>(n));
      channel::add_awgn(window, 1.0, rng);
      const auto& r = rx.tick(window)[sc.index];
      phy::Bit decided;
      if (bpsk) {
        quiet += r.magnitude * norm < opt.scheme.amplitude_threshold;
        decided = std::abs(r.phase_deg) <= opt.scheme.phase_threshold_deg ? 1 : 0;
      } else {
        decided = r.magnitude * norm >= opt.scheme.amplitude_threshold ? 1 : 0;
      }
      errors += decided != chip;
    }
    table.snr_db.push_back(snr);
    table.chip_error.push_back(static_cast<double>(errors) /
                               static_cast<double>(opt.chips_per_point));
    table.carrier_loss.push_back(static_cast<double>(quiet) /
                                 static_cast<double>(opt.chips_per_point));
  }
  return table;
}

inline std::string table_to_yaml(const CalibrationTable& t) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "modulation" << YAML::Value
      << (t.modulation == phy::ModulationKind::kBpsk ? "bpsk" : "ook");
  out << YAML::Key << "fft_size" << YAML::Value << t.fft_size;
  out << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
  for (std::size_t i = 0; i < t.snr_db.size(); ++i) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "snr_db" << YAML::Value << t.snr_db[i]
        << YAML::Key << "chip_error" << YAML::Value << t.chip_error[i];
    if (!t.carrier_loss.empty()) {
      out << YAML::Key << "carrier_loss" << YAML::Value << t.carrier_loss[i];
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return out.c_str();
}

inline CalibrationTable table_from_yaml(const YAML::Node& doc) {
  CalibrationTable t;
  try {
    const auto mod = doc["modulation"].as<std::string>();
    if (mod != "bpsk" && mod != "ook") throw ConfigError("modulation", "expected bpsk or ook");
    t.modulation = mod == "bpsk" ? phy::ModulationKind::kBpsk : phy::ModulationKind::kOok;
    t.fft_size = doc["fft_size"].as<std::size_t>();
    for (const auto& p : doc["points"]) {
      t.snr_db.push_back(p["snr_db"].as<double>());
      t.chip_error.push_back(p["chip_error"].as<double>());
      t.carrier_loss.push_back(p["carrier_loss"] ? p["carrier_loss"].as<double>() : 0.0);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError("calibration", e.what());
  }
  if (t.snr_db.empty() || !std::is_sorted(t.snr_db.begin(), t.snr_db.end())) {
    throw ConfigError("calibration.points", "need ascending SNR points");
  }
  return t;
}

}  // namespace snow::sim

#endif  // SNOW_SIM_CALIBRATION_HPP_
