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

#ifndef SNOW_CONFIG_HPP_
#define SNOW_CONFIG_HPP_

// Scenario documents. The grammar is documented in README.md; every field has
// a default, so a band and one node already make a runnable scenario.
// Errors carry the dotted path of the offending field.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "snow/atpc.hpp"
#include "snow/error.hpp"
#include "snow/mac.hpp"
#include "snow/phy/modulation.hpp"
#include "snow/phy/ofdm.hpp"
#include "snow/sop.hpp"
#include "snow/sop_io.hpp"
#include "snow/spectrum.hpp"

namespace snow {

enum class TrafficKind { kPeriodic, kUniform, kSaturated };
enum class PhyMode { kAbstract, kFull };
enum class MacMode { kCsma, kTdma };
enum class AllocationRule { kLocationAware, kShared };

struct TrafficConfig {
  TrafficKind kind = TrafficKind::kUniform;
  std::int64_t period_ticks = 200'000;
  std::int64_t min_ticks = 0;        // uniform inter-arrival bounds
  std::int64_t max_ticks = 200'000;  // 500 ms at 400 kchip/s
  std::int64_t start_ticks = 0;
  std::size_t payload_bytes = 28;
  std::size_t packets = 0;  // 0: until the horizon
  std::optional<mac::NodeId> destination;

  bool operator==(const TrafficConfig&) const = default;
};

struct NodeConfig {
  mac::NodeId id = 0;
  mac::Position position;
  std::optional<std::size_t> subcarrier;  // pins the assignment
  TrafficConfig traffic;
  double speed_mps = 0.0;
  double heading_deg = 0.0;
  double cfo_ppm = 0.0;
  double tx_power_dbm = 0.0;
  int gamma = 1;

  bool operator==(const NodeConfig&) const = default;
};

struct SpectrumConfig {
  Hz start_hz = 572'000'000;
  Hz end_hz = 578'000'000;
  Hz width_hz = 400'000;
  double overlap = 0.5;
  std::vector<FrequencyRange> occupied;

  SpectrumBand band() const { return {start_hz, end_hz, occupied}; }
  bool operator==(const SpectrumConfig&) const = default;
};

struct PhyConfig {
  phy::ModulationScheme scheme{phy::ModulationKind::kBpsk, 8, 3.0, 90.0};
  std::size_t fft_size = 64;
  phy::WindowKind window = phy::WindowKind::kNone;
  std::uint32_t sync_word = phy::kDefaultSyncWord;

  bool operator==(const PhyConfig& o) const {
    return scheme.kind == o.scheme.kind && scheme.spreading_factor == o.scheme.spreading_factor &&
           scheme.amplitude_threshold == o.scheme.amplitude_threshold &&
           scheme.phase_threshold_deg == o.scheme.phase_threshold_deg &&
           fft_size == o.fft_size && window == o.window && sync_word == o.sync_word;
  }
};

struct ChannelConfig {
  double path_loss_exponent = 3.2;
  std::optional<double> reference_loss_db;  // default: free space at band centre
  double noise_floor_dbm = -100.0;          // -94 dBm sensitivity at 6 dB SNR
  bool noiseless = false;
  double cfo_ppm_max = 0.0;  // nodes without an explicit cfo_ppm draw from +-this

  bool operator==(const ChannelConfig&) const = default;
};

struct MacConfig {
  MacMode mode = MacMode::kCsma;
  mac::AckMode ack_mode = mac::AckMode::kBitVector;  // needs downlink_subcarrier
  mac::BackoffConfig backoff;
  std::int64_t beacon_period_ticks = 400'000;
  std::optional<std::size_t> join_subcarrier;
  std::optional<std::size_t> downlink_subcarrier;
  double comm_range_m = 100.0;
  double bs_range_m = 1000.0;
  AllocationRule allocation = AllocationRule::kLocationAware;
  bool cfo_feedback = true;
  std::int64_t inactivity_window_ticks = 0;
  std::size_t health_window = 0;
  double health_threshold = 0.5;
  std::size_t backup_count = 2;

  bool operator==(const MacConfig&) const = default;
};

struct AtpcConfig {
  bool enabled = false;
  std::vector<double> tp_levels = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double pdr_threshold = 90.0;
  std::size_t probe_packets = 20;
  std::size_t window_packets = 20;
  double displacement_m = 50.0;
  double pdr_margin = 5.0;

  bool operator==(const AtpcConfig&) const = default;
};

struct SopConfig {
  std::string algorithm = "greedy";  // greedy | approx | optimal
  std::uint64_t seed = 1;
  std::optional<sop::SopInstance> instance;
  std::optional<sop::GeneratorParams> generate;
  std::uint64_t generate_seed = 1;

  sop::SopInstance resolve() const {
    if (instance) return *instance;
    if (generate) return sop::generate_instance(*generate, generate_seed);
    throw ConfigError("sop", "needs an instance or generator parameters");
  }

  bool operator==(const SopConfig&) const = default;
};

struct RunConfig {
  std::int64_t horizon_ticks = 4'000'000;
  std::uint64_t seed = 1;
  PhyMode phy_mode = PhyMode::kAbstract;
  double chip_rate_hz = 400'000.0;  // 50 kbps at SF 8
  bool trace = false;
  std::string output_dir;
  std::string calibration_file;

  bool operator==(const RunConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  SpectrumConfig spectrum;
  mac::Position bs_position;
  std::vector<NodeConfig> nodes;
  PhyConfig phy;
  ChannelConfig channel;
  MacConfig mac;
  AtpcConfig atpc;
  std::optional<SopConfig> sop;
  RunConfig run;

  SubcarrierPlan plan() const {
    return plan_subcarriers(spectrum.band(), spectrum.width_hz, spectrum.overlap);
  }

  // Join, its immediate neighbours and the downlink stay out of the uplink pool.
  std::set<SubcarrierId> reserved() const {
    std::set<SubcarrierId> r;
    const std::size_t n = plan().size();
    if (mac.join_subcarrier) {
      const std::size_t j = *mac.join_subcarrier;
      r.insert({j});
      if (j > 0) r.insert({j - 1});
      if (j + 1 < n) r.insert({j + 1});
    }
    if (mac.downlink_subcarrier) r.insert({*mac.downlink_subcarrier});
    return r;
  }

  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

// Nodes evenly spaced on a circle around the BS.
inline std::vector<NodeConfig> ring_nodes(std::size_t count, double radius_m, mac::Position centre,
                                          const TrafficConfig& traffic = {}) {
  std::vector<NodeConfig> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    NodeConfig n;
    n.id = static_cast<mac::NodeId>(k);
    n.position = {centre.x + radius_m * std::cos(a), centre.y + radius_m * std::sin(a)};
    n.traffic = traffic;
    out.push_back(n);
  }
  return out;
}

inline void ScenarioConfig::validate() const {
  try {
    spectrum.band().validate();
  } catch (const Error& e) {
    throw ConfigError("spectrum", e.what());
  }
  if (spectrum.width_hz <= 0) throw ConfigError("spectrum.width_hz", "must be positive");
  if (!(spectrum.overlap > 0.0 && spectrum.overlap <= 0.5)) {
    throw ConfigError("spectrum.overlap", "invalid overlap: must lie in (0, 0.5]");
  }
  SubcarrierPlan p;
  try {
    p = plan();
  } catch (const Error& e) {
    throw ConfigError("spectrum", e.what());
  }
  try {
    phy.scheme.validate();
  } catch (const Error& e) {
    throw ConfigError("phy", e.what());
  }
  if (phy.fft_size < p.size()) throw ConfigError("phy.fft_size", "smaller than the subcarrier count");
  if (channel.path_loss_exponent < 1.6 || channel.path_loss_exponent > 6.0) {
    throw ConfigError("channel.path_loss_exponent", "must lie in [1.6, 6]");
  }
  if (channel.cfo_ppm_max < 0) throw ConfigError("channel.cfo_ppm_max", "must be non-negative");
  try {
    mac.backoff.validate();
  } catch (const Error& e) {
    throw ConfigError("mac", e.what());
  }
  if (mac.beacon_period_ticks <= 0) throw ConfigError("mac.beacon_period_ticks", "must be positive");
  auto check_sc = [&](std::size_t sc, const std::string& path) {
    if (sc >= p.size()) throw ConfigError(path, "no such subcarrier");
    if (!p.usable({sc})) throw ConfigError(path, "subcarrier is not usable");
  };
  if (mac.join_subcarrier) check_sc(*mac.join_subcarrier, "mac.join_subcarrier");
  if (mac.downlink_subcarrier) check_sc(*mac.downlink_subcarrier, "mac.downlink_subcarrier");
  if (mac.join_subcarrier && mac.downlink_subcarrier) {
    const auto j = static_cast<long long>(*mac.join_subcarrier);
    const auto d = static_cast<long long>(*mac.downlink_subcarrier);
    if (std::llabs(j - d) <= 1) {
      throw ConfigError("mac.downlink_subcarrier", "must not be the join subcarrier or its neighbour");
    }
  }
  if (mac.ack_mode == mac::AckMode::kBitVector && !mac.downlink_subcarrier) {
    throw ConfigError("mac.downlink_subcarrier", "required for bit-vector ACKs");
  }
  if (mac.health_window > 0 && !(mac.health_threshold > 0 && mac.health_threshold < 1)) {
    throw ConfigError("mac.health_threshold", "must lie in (0, 1)");
  }
  if (mac::uplink_pool(p, reserved()).empty()) {
    throw ConfigError("spectrum", "no usable uplink subcarriers");
  }
  if (atpc.enabled) {
    try {
      ::snow::atpc::validate_levels(atpc.tp_levels);
    } catch (const Error& e) {
      throw ConfigError("atpc.tp_levels", e.what());
    }
    if (atpc.tp_levels.size() < 2) throw ConfigError("atpc.tp_levels", "need at least two levels");
    if (atpc.window_packets == 0 || atpc.probe_packets == 0) {
      throw ConfigError("atpc", "packet counts must be positive");
    }
  }
  if (nodes.empty()) throw ConfigError("nodes", "need at least one node");
  std::set<mac::NodeId> ids;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    const std::string path = "nodes[" + std::to_string(k) + "]";
    if (!ids.insert(n.id).second) throw ConfigError(path + ".id", "duplicate node id");
    if (n.subcarrier) {
      check_sc(*n.subcarrier, path + ".subcarrier");
      if (reserved().contains({*n.subcarrier})) {
        throw ConfigError(path + ".subcarrier", "reserved for join or downlink");
      }
    }
    if (n.gamma < 1) throw ConfigError(path + ".gamma", "must be >= 1");
    if (n.speed_mps < 0) throw ConfigError(path + ".speed_mps", "must be non-negative");
    const auto& t = n.traffic;
    if (t.payload_bytes > phy::kMaxPayloadBytes) {
      throw ConfigError(path + ".traffic.payload_bytes", "at most 255");
    }
    if (t.kind == TrafficKind::kPeriodic && t.period_ticks <= 0) {
      throw ConfigError(path + ".traffic.period_ticks", "must be positive");
    }
    if (t.kind == TrafficKind::kUniform && (t.min_ticks < 0 || t.max_ticks < t.min_ticks)) {
      throw ConfigError(path + ".traffic", "need 0 <= min_ticks <= max_ticks");
    }
    if (t.start_ticks < 0) throw ConfigError(path + ".traffic.start_ticks", "must be non-negative");
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& d = nodes[k].traffic.destination;
    if (d && !ids.contains(*d)) {
      throw ConfigError("nodes[" + std::to_string(k) + "].traffic.destination", "unknown node");
    }
  }
  if (sop) {
    if (sop->algorithm != "greedy" && sop->algorithm != "approx" && sop->algorithm != "optimal") {
      throw ConfigError("sop.algorithm", "expected greedy, approx or optimal");
    }
    sop::SopInstance inst;
    try {
      inst = sop->resolve();
      inst.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("sop", e.what());
    }
    for (const auto& b : inst.bs) {
      for (int x : b.availability) {
        if (x < 0 || static_cast<std::size_t>(x) >= p.size()) {
          throw ConfigError("sop", "availability names subcarrier " + std::to_string(x) +
                                       " outside the plan");
        }
      }
    }
  }
  if (run.horizon_ticks <= 0) throw ConfigError("run.horizon_ticks", "must be positive");
  if (!(run.chip_rate_hz > 0)) throw ConfigError("run.chip_rate_hz", "must be positive");
}

// --- YAML --------------------------------------------------------------------

namespace config_detail {

inline void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                       const std::string& path) {
  if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& path) {
  const auto v = node[key];
  if (!v) return;
  const std::string p = path.empty() ? key : path + "." + key;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(p, "wrong type");
  }
}

template <typename T>
void read_opt(const YAML::Node& node, const char* key, std::optional<T>& out,
              const std::string& path) {
  const auto v = node[key];
  if (!v || v.IsNull()) return;
  T value{};
  read(node, key, value, path);
  out = value;
}

inline mac::Position read_position(const YAML::Node& v, const std::string& path) {
  if (!v.IsSequence() || v.size() != 2) throw ConfigError(path, "expected [x, y]");
  try {
    return {v[0].as<double>(), v[1].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "wrong type");
  }
}

template <typename E>
E read_enum(const YAML::Node& node, const char* key, E fallback,
            std::initializer_list<std::pair<const char*, E>> names, const std::string& path) {
  const auto v = node[key];
  if (!v) return fallback;
  const std::string p = path.empty() ? key : path + "." + key;
  std::string s;
  try {
    s = v.as<std::string>();
  } catch (const YAML::Exception&) {
    throw ConfigError(p, "wrong type");
  }
  std::string options;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    options += options.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(p, "expected one of: " + options);
}

inline TrafficConfig read_traffic(const YAML::Node& t, TrafficConfig out, const std::string& path) {
  if (!t) return out;
  check_keys(t, {"kind", "period_ticks", "min_ticks", "max_ticks", "start_ticks", "payload_bytes",
                 "packets", "destination"},
             path);
  out.kind = read_enum(t, "kind", out.kind,
                       {{"periodic", TrafficKind::kPeriodic},
                        {"uniform", TrafficKind::kUniform},
                        {"saturated", TrafficKind::kSaturated}},
                       path);
  read(t, "period_ticks", out.period_ticks, path);
  read(t, "min_ticks", out.min_ticks, path);
  read(t, "max_ticks", out.max_ticks, path);
  read(t, "start_ticks", out.start_ticks, path);
  read(t, "payload_bytes", out.payload_bytes, path);
  read(t, "packets", out.packets, path);
  read_opt(t, "destination", out.destination, path);
  return out;
}

inline const char* name_of(TrafficKind k) {
  switch (k) {
    case TrafficKind::kPeriodic: return "periodic";
    case TrafficKind::kUniform: return "uniform";
    case TrafficKind::kSaturated: return "saturated";
  }
  return "?";
}

inline void emit_traffic(YAML::Emitter& out, const TrafficConfig& t) {
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << name_of(t.kind);
  out << YAML::Key << "period_ticks" << YAML::Value << t.period_ticks;
  out << YAML::Key << "min_ticks" << YAML::Value << t.min_ticks;
  out << YAML::Key << "max_ticks" << YAML::Value << t.max_ticks;
  out << YAML::Key << "start_ticks" << YAML::Value << t.start_ticks;
  out << YAML::Key << "payload_bytes" << YAML::Value << t.payload_bytes;
  out << YAML::Key << "packets" << YAML::Value << t.packets;
  if (t.destination) out << YAML::Key << "destination" << YAML::Value << *t.destination;
  out << YAML::EndMap;
}

}  // namespace config_detail

inline ScenarioConfig config_from_yaml(const YAML::Node& doc) {
  using namespace config_detail;
  if (!doc || !doc.IsMap()) throw ConfigError("", "scenario must be a mapping");
  check_keys(doc, {"name", "spectrum", "base_station", "nodes", "phy", "channel", "mac", "atpc",
                   "sop", "run"},
             "");
  ScenarioConfig c;
  read(doc, "name", c.name, "");

  if (const auto s = doc["spectrum"]) {
    check_keys(s, {"start_hz", "end_hz", "width_hz", "overlap", "occupied"}, "spectrum");
    read(s, "start_hz", c.spectrum.start_hz, "spectrum");
    read(s, "end_hz", c.spectrum.end_hz, "spectrum");
    read(s, "width_hz", c.spectrum.width_hz, "spectrum");
    read(s, "overlap", c.spectrum.overlap, "spectrum");
    if (const auto occ = s["occupied"]) {
      for (std::size_t k = 0; k < occ.size(); ++k) {
        const std::string p = "spectrum.occupied[" + std::to_string(k) + "]";
        if (!occ[k].IsSequence() || occ[k].size() != 2) throw ConfigError(p, "expected [start_hz, end_hz]");
        try {
          c.spectrum.occupied.push_back({occ[k][0].as<Hz>(), occ[k][1].as<Hz>()});
        } catch (const YAML::Exception&) {
          throw ConfigError(p, "wrong type");
        }
      }
    }
  }
  if (const auto b = doc["base_station"]) {
    check_keys(b, {"position"}, "base_station");
    if (b["position"]) c.bs_position = read_position(b["position"], "base_station.position");
  }

  if (const auto p = doc["phy"]) {
    check_keys(p, {"modulation", "spreading_factor", "amplitude_threshold", "phase_threshold_deg",
                   "fft_size", "window", "sync_word"},
               "phy");
    c.phy.scheme.kind = read_enum(p, "modulation", c.phy.scheme.kind,
                                  {{"bpsk", phy::ModulationKind::kBpsk},
                                   {"ook", phy::ModulationKind::kOok}},
                                  "phy");
    read(p, "spreading_factor", c.phy.scheme.spreading_factor, "phy");
    read(p, "amplitude_threshold", c.phy.scheme.amplitude_threshold, "phy");
    read(p, "phase_threshold_deg", c.phy.scheme.phase_threshold_deg, "phy");
    read(p, "fft_size", c.phy.fft_size, "phy");
    c.phy.window = read_enum(p, "window", c.phy.window,
                             {{"none", phy::WindowKind::kNone},
                              {"blackman_harris", phy::WindowKind::kBlackmanHarris}},
                             "phy");
    read(p, "sync_word", c.phy.sync_word, "phy");
  }

  if (const auto ch = doc["channel"]) {
    check_keys(ch, {"path_loss_exponent", "reference_loss_db", "noise_floor_dbm", "noiseless",
                    "cfo_ppm_max"},
               "channel");
    read(ch, "path_loss_exponent", c.channel.path_loss_exponent, "channel");
    read_opt(ch, "reference_loss_db", c.channel.reference_loss_db, "channel");
    read(ch, "noise_floor_dbm", c.channel.noise_floor_dbm, "channel");
    read(ch, "noiseless", c.channel.noiseless, "channel");
    read(ch, "cfo_ppm_max", c.channel.cfo_ppm_max, "channel");
  }

  if (const auto m = doc["mac"]) {
    check_keys(m, {"mode", "ack_mode", "initial_window", "congestion_window", "retry_cap",
                   "beacon_period_ticks", "join_subcarrier", "downlink_subcarrier",
                   "comm_range_m", "bs_range_m", "allocation", "cfo_feedback",
                   "inactivity_window_ticks", "health_window", "health_threshold",
                   "backup_count"},
               "mac");
    c.mac.mode = read_enum(m, "mode", c.mac.mode,
                           {{"csma", MacMode::kCsma}, {"tdma", MacMode::kTdma}}, "mac");
    c.mac.ack_mode = read_enum(m, "ack_mode", c.mac.ack_mode,
                               {{"bitvector", mac::AckMode::kBitVector},
                                {"per_subcarrier", mac::AckMode::kPerSubcarrier}},
                               "mac");
    read(m, "initial_window", c.mac.backoff.initial_window, "mac");
    read(m, "congestion_window", c.mac.backoff.congestion_window, "mac");
    if (const auto r = m["retry_cap"]) {
      if (r.IsScalar() && r.Scalar() == "unlimited") {
        c.mac.backoff.retry_cap = mac::kUnlimitedRetries;
      } else {
        read(m, "retry_cap", c.mac.backoff.retry_cap, "mac");
      }
    }
    read(m, "beacon_period_ticks", c.mac.beacon_period_ticks, "mac");
    read_opt(m, "join_subcarrier", c.mac.join_subcarrier, "mac");
    read_opt(m, "downlink_subcarrier", c.mac.downlink_subcarrier, "mac");
    read(m, "comm_range_m", c.mac.comm_range_m, "mac");
    read(m, "bs_range_m", c.mac.bs_range_m, "mac");
    c.mac.allocation = read_enum(m, "allocation", c.mac.allocation,
                                 {{"location_aware", AllocationRule::kLocationAware},
                                  {"shared", AllocationRule::kShared}},
                                 "mac");
    read(m, "cfo_feedback", c.mac.cfo_feedback, "mac");
    read(m, "inactivity_window_ticks", c.mac.inactivity_window_ticks, "mac");
    read(m, "health_window", c.mac.health_window, "mac");
    read(m, "health_threshold", c.mac.health_threshold, "mac");
    read(m, "backup_count", c.mac.backup_count, "mac");
  }

  if (const auto a = doc["atpc"]) {
    check_keys(a, {"enabled", "tp_levels", "pdr_threshold", "probe_packets", "window_packets",
                   "displacement_m", "pdr_margin"},
               "atpc");
    read(a, "enabled", c.atpc.enabled, "atpc");
    read(a, "tp_levels", c.atpc.tp_levels, "atpc");
    read(a, "pdr_threshold", c.atpc.pdr_threshold, "atpc");
    read(a, "probe_packets", c.atpc.probe_packets, "atpc");
    read(a, "window_packets", c.atpc.window_packets, "atpc");
    read(a, "displacement_m", c.atpc.displacement_m, "atpc");
    read(a, "pdr_margin", c.atpc.pdr_margin, "atpc");
  }

  if (const auto s = doc["sop"]) {
    check_keys(s, {"algorithm", "seed", "instance", "generate"}, "sop");
    SopConfig sc;
    read(s, "algorithm", sc.algorithm, "sop");
    read(s, "seed", sc.seed, "sop");
    if (s["instance"]) {
      try {
        sc.instance = sop::instance_from_yaml(s["instance"]);
      } catch (const ConfigError& e) {
        throw ConfigError("sop.instance" + (e.path().empty() ? "" : "." + e.path()),
                          e.message());
      }
    }
    if (const auto g = s["generate"]) {
      check_keys(g, {"base_stations", "universe", "availability_p", "topology",
                     "extra_interference_p", "sigma_fraction", "seed"},
                 "sop.generate");
      sop::GeneratorParams gp;
      read(g, "base_stations", gp.base_stations, "sop.generate");
      read(g, "universe", gp.universe, "sop.generate");
      read(g, "availability_p", gp.availability_p, "sop.generate");
      gp.topology = read_enum(g, "topology", gp.topology,
                              {{"chain", sop::Topology::kChain},
                               {"star", sop::Topology::kStar},
                               {"random_tree", sop::Topology::kRandomTree}},
                              "sop.generate");
      read(g, "extra_interference_p", gp.extra_interference_p, "sop.generate");
      read(g, "sigma_fraction", gp.sigma_fraction, "sop.generate");
      read(g, "seed", sc.generate_seed, "sop.generate");
      sc.generate = gp;
    }
    c.sop = sc;
  }

  if (const auto r = doc["run"]) {
    check_keys(r, {"horizon_ticks", "seed", "phy_mode", "chip_rate_hz", "trace", "output_dir",
                   "calibration_file"},
               "run");
    read(r, "horizon_ticks", c.run.horizon_ticks, "run");
    read(r, "seed", c.run.seed, "run");
    c.run.phy_mode = read_enum(r, "phy_mode", c.run.phy_mode,
                               {{"abstract", PhyMode::kAbstract}, {"full", PhyMode::kFull}}, "run");
    read(r, "chip_rate_hz", c.run.chip_rate_hz, "run");
    read(r, "trace", c.run.trace, "run");
    read(r, "output_dir", c.run.output_dir, "run");
    read(r, "calibration_file", c.run.calibration_file, "run");
  }

  // Nodes last: a generated layout needs the BS position.
  if (const auto n = doc["nodes"]) {
    if (n.IsMap()) {
      check_keys(n, {"count", "layout", "radius_m", "traffic"}, "nodes");
      std::size_t count = 1;
      double radius = 100.0;
      std::string layout = "ring";
      read(n, "count", count, "nodes");
      read(n, "radius_m", radius, "nodes");
      read(n, "layout", layout, "nodes");
      if (layout != "ring") throw ConfigError("nodes.layout", "expected one of: ring");
      if (count == 0) throw ConfigError("nodes.count", "must be positive");
      c.nodes = ring_nodes(count, radius, c.bs_position, read_traffic(n["traffic"], {}, "nodes.traffic"));
    } else if (n.IsSequence()) {
      for (std::size_t k = 0; k < n.size(); ++k) {
        const std::string p = "nodes[" + std::to_string(k) + "]";
        const auto e = n[k];
        check_keys(e, {"id", "position", "subcarrier", "traffic", "speed_mps", "heading_deg",
                       "cfo_ppm", "tx_power_dbm", "gamma"},
                   p);
        NodeConfig nc;
        nc.id = static_cast<mac::NodeId>(k);
        read(e, "id", nc.id, p);
        if (e["position"]) nc.position = read_position(e["position"], p + ".position");
        read_opt(e, "subcarrier", nc.subcarrier, p);
        nc.traffic = read_traffic(e["traffic"], {}, p + ".traffic");
        read(e, "speed_mps", nc.speed_mps, p);
        read(e, "heading_deg", nc.heading_deg, p);
        read(e, "cfo_ppm", nc.cfo_ppm, p);
        read(e, "tx_power_dbm", nc.tx_power_dbm, p);
        read(e, "gamma", nc.gamma, p);
        c.nodes.push_back(nc);
      }
    } else {
      throw ConfigError("nodes", "expected a list or a generator mapping");
    }
  }
  // Bit-vector ACKs need a downlink; without one, take the highest usable
  // subcarrier clear of the join subcarrier and its neighbours.
  if (c.mac.ack_mode == mac::AckMode::kBitVector && !c.mac.downlink_subcarrier) {
    try {
      const auto plan = c.plan();
      for (std::size_t k = plan.size(); k-- > 0;) {
        if (!plan.usable({k})) continue;
        if (c.mac.join_subcarrier &&
            std::llabs(static_cast<long long>(k) - static_cast<long long>(*c.mac.join_subcarrier)) <= 1) {
          continue;
        }
        c.mac.downlink_subcarrier = k;
        break;
      }
    } catch (const Error&) {
      // A broken spectrum block is reported by validate().
    }
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config_string(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return config_from_yaml(doc);
}

inline ScenarioConfig load_config(const std::string& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path, "cannot open file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
  return config_from_yaml(doc);
}

inline std::string serialize_config(const ScenarioConfig& c) {
  using namespace config_detail;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;

  out << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "start_hz" << YAML::Value << c.spectrum.start_hz;
  out << YAML::Key << "end_hz" << YAML::Value << c.spectrum.end_hz;
  out << YAML::Key << "width_hz" << YAML::Value << c.spectrum.width_hz;
  out << YAML::Key << "overlap" << YAML::Value << c.spectrum.overlap;
  out << YAML::Key << "occupied" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : c.spectrum.occupied) {
    out << YAML::Flow << YAML::BeginSeq << r.start_hz << r.end_hz << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "base_station" << YAML::Value << YAML::BeginMap << YAML::Key << "position"
      << YAML::Value << YAML::Flow << YAML::BeginSeq << c.bs_position.x << c.bs_position.y
      << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : c.nodes) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << n.id;
    out << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginSeq << n.position.x
        << n.position.y << YAML::EndSeq;
    if (n.subcarrier) out << YAML::Key << "subcarrier" << YAML::Value << *n.subcarrier;
    out << YAML::Key << "traffic" << YAML::Value;
    emit_traffic(out, n.traffic);
    out << YAML::Key << "speed_mps" << YAML::Value << n.speed_mps;
    out << YAML::Key << "heading_deg" << YAML::Value << n.heading_deg;
    out << YAML::Key << "cfo_ppm" << YAML::Value << n.cfo_ppm;
    out << YAML::Key << "tx_power_dbm" << YAML::Value << n.tx_power_dbm;
    out << YAML::Key << "gamma" << YAML::Value << n.gamma;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "phy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "modulation" << YAML::Value
      << (c.phy.scheme.kind == phy::ModulationKind::kBpsk ? "bpsk" : "ook");
  out << YAML::Key << "spreading_factor" << YAML::Value << c.phy.scheme.spreading_factor;
  out << YAML::Key << "amplitude_threshold" << YAML::Value << c.phy.scheme.amplitude_threshold;
  out << YAML::Key << "phase_threshold_deg" << YAML::Value << c.phy.scheme.phase_threshold_deg;
  out << YAML::Key << "fft_size" << YAML::Value << c.phy.fft_size;
  out << YAML::Key << "window" << YAML::Value
      << (c.phy.window == phy::WindowKind::kNone ? "none" : "blackman_harris");
  out << YAML::Key << "sync_word" << YAML::Value << c.phy.sync_word;
  out << YAML::EndMap;

  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "path_loss_exponent" << YAML::Value << c.channel.path_loss_exponent;
  if (c.channel.reference_loss_db) {
    out << YAML::Key << "reference_loss_db" << YAML::Value << *c.channel.reference_loss_db;
  }
  out << YAML::Key << "noise_floor_dbm" << YAML::Value << c.channel.noise_floor_dbm;
  out << YAML::Key << "noiseless" << YAML::Value << c.channel.noiseless;
  out << YAML::Key << "cfo_ppm_max" << YAML::Value << c.channel.cfo_ppm_max;
  out << YAML::EndMap;

  out << YAML::Key << "mac" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << (c.mac.mode == MacMode::kCsma ? "csma" : "tdma");
  out << YAML::Key << "ack_mode" << YAML::Value
      << (c.mac.ack_mode == mac::AckMode::kBitVector ? "bitvector" : "per_subcarrier");
  out << YAML::Key << "initial_window" << YAML::Value << c.mac.backoff.initial_window;
  out << YAML::Key << "congestion_window" << YAML::Value << c.mac.backoff.congestion_window;
  out << YAML::Key << "retry_cap" << YAML::Value;
  if (c.mac.backoff.retry_cap == mac::kUnlimitedRetries) {
    out << "unlimited";
  } else {
    out << c.mac.backoff.retry_cap;
  }
  out << YAML::Key << "beacon_period_ticks" << YAML::Value << c.mac.beacon_period_ticks;
  if (c.mac.join_subcarrier) out << YAML::Key << "join_subcarrier" << YAML::Value << *c.mac.join_subcarrier;
  if (c.mac.downlink_subcarrier) {
    out << YAML::Key << "downlink_subcarrier" << YAML::Value << *c.mac.downlink_subcarrier;
  }
  out << YAML::Key << "comm_range_m" << YAML::Value << c.mac.comm_range_m;
  out << YAML::Key << "bs_range_m" << YAML::Value << c.mac.bs_range_m;
  out << YAML::Key << "allocation" << YAML::Value
      << (c.mac.allocation == AllocationRule::kLocationAware ? "location_aware" : "shared");
  out << YAML::Key << "cfo_feedback" << YAML::Value << c.mac.cfo_feedback;
  out << YAML::Key << "inactivity_window_ticks" << YAML::Value << c.mac.inactivity_window_ticks;
  out << YAML::Key << "health_window" << YAML::Value << c.mac.health_window;
  out << YAML::Key << "health_threshold" << YAML::Value << c.mac.health_threshold;
  out << YAML::Key << "backup_count" << YAML::Value << c.mac.backup_count;
  out << YAML::EndMap;

  out << YAML::Key << "atpc" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << c.atpc.enabled;
  out << YAML::Key << "tp_levels" << YAML::Value << YAML::Flow << c.atpc.tp_levels;
  out << YAML::Key << "pdr_threshold" << YAML::Value << c.atpc.pdr_threshold;
  out << YAML::Key << "probe_packets" << YAML::Value << c.atpc.probe_packets;
  out << YAML::Key << "window_packets" << YAML::Value << c.atpc.window_packets;
  out << YAML::Key << "displacement_m" << YAML::Value << c.atpc.displacement_m;
  out << YAML::Key << "pdr_margin" << YAML::Value << c.atpc.pdr_margin;
  out << YAML::EndMap;

  if (c.sop) {
    const auto& s = *c.sop;
    out << YAML::Key << "sop" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "algorithm" << YAML::Value << s.algorithm;
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    if (s.instance) {
      out << YAML::Key << "instance" << YAML::Value;
      sop::emit_instance(out, *s.instance);
    }
    if (s.generate) {
      const auto& g = *s.generate;
      out << YAML::Key << "generate" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "base_stations" << YAML::Value << g.base_stations;
      out << YAML::Key << "universe" << YAML::Value << g.universe;
      out << YAML::Key << "availability_p" << YAML::Value << g.availability_p;
      out << YAML::Key << "topology" << YAML::Value
          << (g.topology == sop::Topology::kChain  ? "chain"
              : g.topology == sop::Topology::kStar ? "star"
                                                   : "random_tree");
      out << YAML::Key << "extra_interference_p" << YAML::Value << g.extra_interference_p;
      out << YAML::Key << "sigma_fraction" << YAML::Value << g.sigma_fraction;
      out << YAML::Key << "seed" << YAML::Value << s.generate_seed;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "horizon_ticks" << YAML::Value << c.run.horizon_ticks;
  out << YAML::Key << "seed" << YAML::Value << c.run.seed;
  out << YAML::Key << "phy_mode" << YAML::Value
      << (c.run.phy_mode == PhyMode::kAbstract ? "abstract" : "full");
  out << YAML::Key << "chip_rate_hz" << YAML::Value << c.run.chip_rate_hz;
  out << YAML::Key << "trace" << YAML::Value << c.run.trace;
  out << YAML::Key << "output_dir" << YAML::Value << c.run.output_dir;
  out << YAML::Key << "calibration_file" << YAML::Value << c.run.calibration_file;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace snow

#endif  // SNOW_CONFIG_HPP_
