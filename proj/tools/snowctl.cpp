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

// snowctl: command-line front end for the snow library.
//
// Exit codes:
//   0  success
//   1  internal error
//   2  bad command line
//   3  invalid configuration or input document
//   4  SOP instance infeasible (allocation or tree links)
//   5  I/O failure writing artifacts

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "snow/config.hpp"
#include "snow/phy/loopback.hpp"
#include "snow/phy/papr.hpp"
#include "snow/presets.hpp"
#include "snow/sim/calibration.hpp"
#include "snow/sim/simulator.hpp"
#include "snow/sop.hpp"
#include "snow/sop_io.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInvalid = 3,
  kInfeasible = 4,
  kIoFailure = 5,
};

constexpr const char* kOutputEnv = "SNOW_OUTPUT_DIR";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --out wins, then the environment, then the config's run.output_dir.
std::filesystem::path output_dir(const std::string& flag, const std::string& from_config = {}) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  if (!from_config.empty()) return from_config;
  return ".";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

snow::ScenarioConfig load_scenario(const std::string& config, const std::string& preset) {
  if (!config.empty()) return snow::load_config(config);
  return snow::load_preset(preset.empty() ? "ch3-defaults" : preset);
}

std::string set_to_string(const snow::sop::SubcarrierSet& s) {
  std::string out = "{";
  for (int x : s) out += (out.size() > 1 ? ", " : "") + std::to_string(x);
  return out + "}";
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config, preset, out, phy_mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> nodes;
  std::optional<std::int64_t> horizon;
  bool trace = false;
  bool print_config = false;
};

void resize_nodes(snow::ScenarioConfig& cfg, std::size_t count) {
  if (count <= cfg.nodes.size()) {
    cfg.nodes.resize(count);
    return;
  }
  if (cfg.nodes.empty()) throw snow::ConfigError("nodes", "no node to take traffic and radius from");
  const double radius = std::max(1.0, snow::mac::distance(cfg.nodes.front().position, cfg.bs_position));
  cfg.nodes = snow::ring_nodes(count, radius, cfg.bs_position, cfg.nodes.front().traffic);
}

int run_simulate(const SimulateArgs& a) {
  auto cfg = load_scenario(a.config, a.preset);
  if (a.seed) cfg.run.seed = *a.seed;
  if (a.nodes) resize_nodes(cfg, *a.nodes);
  if (a.horizon) cfg.run.horizon_ticks = *a.horizon;
  if (!a.phy_mode.empty()) {
    cfg.run.phy_mode = a.phy_mode == "full" ? snow::PhyMode::kFull : snow::PhyMode::kAbstract;
  }
  if (a.trace) cfg.run.trace = true;
  cfg.validate();
  if (a.print_config) {
    std::cout << snow::serialize_config(cfg);
    return kOk;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = snow::sim::run_scenario(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& r = result.report;

  const auto dir = output_dir(a.out, cfg.run.output_dir);
  const auto metrics = dir / (cfg.name + "-metrics.yaml");
  write_file(metrics, snow::sim::report_to_yaml(r));
  std::optional<std::filesystem::path> trace;
  if (cfg.run.trace) {
    trace = dir / (cfg.name + "-trace.csv");
    write_file(*trace, result.trace.csv());
  }

  const double horizon_s = static_cast<double>(r.horizon_ticks) * r.tick_s;
  std::cout << "scenario " << r.name << "  seed " << r.seed << "  phy " << r.phy_mode
            << "  horizon " << std::fixed << std::setprecision(3) << horizon_s << " s  nodes "
            << r.nodes.size() << "  base stations " << r.base_stations << "\n";
  std::cout << "  node   sc    sent   deliv     prr   thr_bps   lat_ms  energy_mJ\n";
  auto row = [](const std::string& id, const std::string& sc, const snow::sim::NodeMetrics& m) {
    std::cout << std::setw(6) << id << std::setw(5) << sc << std::setw(8) << m.sent << std::setw(8)
              << m.delivered << std::setw(8) << std::setprecision(3) << m.prr << std::setw(10)
              << std::setprecision(1) << m.throughput_bps << std::setw(9) << std::setprecision(2)
              << m.mean_latency_s * 1e3 << std::setw(11) << std::setprecision(3) << m.energy_mj
              << "\n";
  };
  for (const auto& m : r.nodes) row(std::to_string(m.id), std::to_string(m.subcarrier), m);
  row("total", "-", r.aggregate);
  if (r.nodes.size() > 1) {
    // Same scenario with only the first node, as the single-node reference.
    auto single = cfg;
    single.nodes.resize(1);
    single.run.trace = false;
    const auto base = snow::sim::run_scenario(single).report.aggregate.throughput_bps;
    std::cout << "aggregate throughput " << std::setprecision(1) << r.aggregate.throughput_bps
              << " bps = " << std::setprecision(2)
              << (base > 0 ? r.aggregate.throughput_bps / base : 0.0)
              << " x the single-node rate (" << std::setprecision(1) << base << " bps)\n";
  }
  std::cout << "collided " << r.aggregate.collided << "  crc_failed " << r.aggregate.crc_failed
            << "  dropped " << r.aggregate.dropped << "  in_flight " << r.in_flight;
  if (r.fft_executions) std::cout << "  G-FFT runs " << r.fft_executions;
  std::cout << "\n";
  if (r.sop) {
    std::cout << "sop " << r.sop->algorithm << " objective " << r.sop->objective << " / "
              << r.sop->bound << (r.sop->feasible ? " feasible" : " INFEASIBLE");
    if (!r.sop->tree_link_error.empty()) std::cout << "; " << r.sop->tree_link_error;
    std::cout << "\n";
  }
  std::cout << "metrics: " << metrics.string() << "\n";
  if (trace) std::cout << "trace: " << trace->string() << "\n";
  std::cout << "wall time " << std::setprecision(2) << wall << " s\n";
  return kOk;
}

// --- sop-solve ----------------------------------------------------------------

struct SopArgs {
  std::string instance, config, preset, algo = "greedy", out;
  std::uint64_t seed = 1;
};

snow::sop::SopInstance load_sop(const SopArgs& a) {
  if (!a.instance.empty()) return snow::sop::load_instance(a.instance);
  const auto cfg = load_scenario(a.config, a.preset);
  if (!cfg.sop) throw snow::ConfigError("sop", "the scenario has no sop section");
  return cfg.sop->resolve();
}

int run_sop_solve(const SopArgs& a) {
  const auto inst = load_sop(a);
  snow::sop::SolveResult res;
  if (a.algo == "optimal") {
    const auto opt = snow::sop::brute_force_optimal(inst);
    if (!opt.feasible) {
      std::cout << "algorithm: optimal\nfeasible: false\n";
      std::cerr << "snowctl: the instance admits no feasible allocation\n";
      return kInfeasible;
    }
    res = snow::sop::finish(inst, opt.allocation);
  } else {
    res = snow::sop::solve(inst, a.algo, a.seed);
  }

  std::optional<std::map<snow::sop::TreeLink, int>> links;
  std::string link_error;
  try {
    links = snow::sop::assign_tree_links(inst, res.allocation);
  } catch (const snow::Error& e) {
    link_error = e.what();
  }

  std::cout << "algorithm: " << a.algo << "\n";
  std::cout << "objective: " << res.objective << "\n";
  std::cout << "bound: " << inst.total_availability() << "\n";
  std::cout << "feasible: " << (res.report.feasible ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < inst.size(); ++i) {
    std::cout << "  BS" << i << " (sigma " << inst.bs[i].sigma << "): "
              << set_to_string(res.allocation[i]) << "\n";
  }
  for (const auto& v : res.report.violations) {
    std::cout << "  violation " << v.constraint << " (" << v.i << ", " << v.j << "): " << v.detail
              << "\n";
  }
  if (links) {
    for (const auto& [link, sc] : *links) {
      std::cout << "  tree link BS" << link.first << " -> BS" << link.second << " on " << sc << "\n";
    }
  } else {
    std::cout << "  tree links: " << link_error << "\n";
  }
  if (!a.out.empty()) {
    write_file(a.out, snow::sop::solution_to_yaml(inst, a.algo, res.allocation, res.report, links));
    std::cout << "solution: " << a.out << "\n";
  }
  return res.report.feasible && links ? kOk : kInfeasible;
}

// --- sop-sweep ----------------------------------------------------------------

struct SweepArgs {
  SopArgs source;
  std::size_t seeds = 10'000;
  std::uint64_t base_seed = 1;
  std::size_t jobs = 0;
  std::size_t generate_bs = 0;
  int universe = 16;
  double availability_p = 0.5;
  double sigma_fraction = 0.0;
  std::uint64_t instance_seed = 1;
};

int run_sop_sweep(const SweepArgs& a) {
  if (a.source.algo != "approx") {
    throw snow::ConfigError("--algo", "sweeps are defined for the randomized 'approx' solver");
  }
  snow::sop::SopInstance inst;
  if (a.generate_bs > 0) {
    snow::sop::GeneratorParams g;
    g.base_stations = a.generate_bs;
    g.universe = a.universe;
    g.availability_p = a.availability_p;
    g.sigma_fraction = a.sigma_fraction;
    inst = snow::sop::generate_instance(g, a.instance_seed);
  } else {
    inst = load_sop(a.source);
  }
  const std::size_t jobs =
      a.jobs ? a.jobs : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = snow::sop::approx_sweep(inst, a.seeds, a.base_seed, jobs);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout << std::setprecision(6);
  std::cout << "runs: " << s.runs << "\n";
  std::cout << "mean: " << s.mean << "\n";
  std::cout << "stddev: " << s.stddev << "\n";
  std::cout << "standard_error: " << s.standard_error << "\n";
  std::cout << "bound: " << s.bound << "\n";
  std::cout << "ratio: " << (s.bound > 0 ? s.mean / s.bound : 0.0) << "\n";
  std::cout << "mean_pair_overlap: " << s.mean_pair_overlap << "\n";
  std::cout << "overlap_ratio: " << (s.shared_total > 0 ? s.mean_pair_overlap / s.shared_total : 0.0)
            << "\n";
  std::cout << "half_bound_minus_3se: " << (0.5 * s.bound - 3 * s.standard_error) << "\n";
  std::cout << "wall_s: " << std::setprecision(3) << wall << "  (jobs " << jobs << ")\n";
  if (!a.source.out.empty()) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "runs" << YAML::Value << s.runs << YAML::Key << "mean"
        << YAML::Value << s.mean << YAML::Key << "stddev" << YAML::Value << s.stddev << YAML::Key
        << "standard_error" << YAML::Value << s.standard_error << YAML::Key << "bound"
        << YAML::Value << s.bound << YAML::Key << "mean_pair_overlap" << YAML::Value
        << s.mean_pair_overlap << YAML::Key << "shared_total" << YAML::Value << s.shared_total
        << YAML::Key << "base_seed" << YAML::Value << a.base_seed << YAML::EndMap;
    write_file(a.source.out, std::string(out.c_str()) + "\n");
  }
  return kOk;
}

// --- phy-bench ----------------------------------------------------------------

struct BenchArgs {
  std::string config, preset, window;
  std::size_t trials = 100;
  std::size_t max_offset = 64;
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  std::size_t papr_frames = 0;
};

int run_phy_bench(const BenchArgs& a) {
  const auto cfg = load_scenario(a.config, a.preset);
  cfg.validate();
  snow::phy::LoopbackOptions o;
  o.scheme = cfg.phy.scheme;
  o.fft_size = cfg.phy.fft_size;
  o.window = cfg.phy.window;
  if (a.window == "blackman_harris") o.window = snow::phy::WindowKind::kBlackmanHarris;
  if (a.window == "none") o.window = snow::phy::WindowKind::kNone;
  o.trials = a.trials;
  o.max_offset_chips = a.max_offset;
  o.snr_db = a.snr_db;
  o.seed = a.seed;
  const auto plan = cfg.plan();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = snow::phy::run_loopback(plan, o);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "subcarriers: " << plan.usable_count() << " usable of " << plan.size() << "\n";
  std::cout << "packets: " << r.packets << "\n";
  std::cout << "delivered: " << r.delivered << "\n";
  std::cout << "prr: " << std::setprecision(6) << r.prr() << "\n";
  std::cout << "crc_failures: " << r.crc_failures << "\n";
  std::cout << "missed: " << r.missed << "\n";
  std::cout << "bit_errors: " << r.bit_errors << "\n";
  std::cout << "ticks: " << r.ticks << "\n";
  std::cout << "forward_ffts: " << r.transforms << "\n";
  std::cout << "ffts_per_tick: " << (r.ticks ? static_cast<double>(r.transforms) / r.ticks : 0.0)
            << "\n";
  std::cout << "wall_s: " << std::setprecision(3) << wall << "\n";
  if (a.papr_frames > 0) {
    const auto samples = snow::phy::bpsk_papr_samples(cfg.phy.fft_size, a.papr_frames, a.seed);
    std::cout << "papr_tail_1e-4_db: " << std::setprecision(4)
              << snow::phy::papr_tail(samples, 1e-4) << "\n";
  }
  return kOk;
}

// --- calibrate ----------------------------------------------------------------

struct CalibrateArgs {
  std::string config, preset, out;
  snow::sim::CalibrationOptions opt;
};

int run_calibrate(CalibrateArgs a) {
  const auto cfg = load_scenario(a.config, a.preset);
  cfg.validate();
  a.opt.scheme = cfg.phy.scheme;
  a.opt.fft_size = cfg.phy.fft_size;
  const auto table = snow::sim::calibrate(cfg.plan(), a.opt);
  const auto text = snow::sim::table_to_yaml(table);
  const auto path = a.out.empty() ? output_dir("") / "calibration.yaml"
                                  : std::filesystem::path(a.out);
  write_file(path, text);
  std::cout << "   snr_db   chip_error  carrier_loss  packet_error(40 B)\n";
  const int r = cfg.phy.scheme.spreading_factor;
  for (std::size_t i = 0; i < table.snr_db.size(); ++i) {
    std::cout << std::fixed << std::setw(9) << std::setprecision(1) << table.snr_db[i]
              << std::setw(13) << std::setprecision(6) << table.chip_error[i] << std::setw(14)
              << table.carrier_loss_at(table.snr_db[i]) << std::setw(20)
              << table.packet_error_at(table.snr_db[i], r, snow::phy::frame_bit_count(28))
              << "\n";
  }
  std::cout << "table: " << path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snowctl: simulate SNOW networks, solve spectrum allocation, bench the PHY"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a scenario and write metrics");
  auto* sim_cfg = simulate->add_option("--config", sim.config, "scenario YAML file");
  auto* sim_pre = simulate->add_option("--preset", sim.preset, "shipped scenario")
                      ->check(CLI::IsMember(snow::preset_names()));
  sim_cfg->excludes(sim_pre);
  simulate->add_option("--seed", sim.seed, "override run.seed");
  simulate->add_option("--out", sim.out, std::string("output directory (default $") + kOutputEnv + ")");
  simulate->add_option("--phy-mode", sim.phy_mode, "override run.phy_mode")
      ->check(CLI::IsMember({"full", "abstract"}));
  simulate->add_flag("--trace", sim.trace, "write the event trace CSV");
  simulate->add_option("--nodes", sim.nodes, "keep the first N nodes (or re-lay a ring of N)");
  simulate->add_option("--horizon", sim.horizon, "override run.horizon_ticks");
  simulate->add_flag("--print-config", sim.print_config, "print the resolved config and exit");

  SopArgs solve;
  auto* sop_solve = app.add_subcommand("sop-solve", "solve a SNOW-tree allocation instance");
  auto* so_inst = sop_solve->add_option("--instance", solve.instance, "SOP instance YAML");
  auto* so_cfg = sop_solve->add_option("--config", solve.config, "scenario with an sop section");
  auto* so_pre = sop_solve->add_option("--preset", solve.preset, "shipped scenario")
                     ->check(CLI::IsMember(snow::preset_names()));
  so_inst->excludes(so_cfg)->excludes(so_pre);
  so_cfg->excludes(so_pre);
  sop_solve->add_option("--algo", solve.algo, "greedy | approx | optimal")
      ->check(CLI::IsMember({"greedy", "approx", "optimal"}));
  sop_solve->add_option("--seed", solve.seed, "seed for the randomized solver");
  sop_solve->add_option("--out", solve.out, "write the solution YAML here");

  SweepArgs sweep;
  sweep.source.algo = "approx";
  auto* sop_sweep = app.add_subcommand("sop-sweep", "Monte-Carlo over seeds of the randomized solver");
  auto* sw_inst = sop_sweep->add_option("--instance", sweep.source.instance, "SOP instance YAML");
  auto* sw_cfg = sop_sweep->add_option("--config", sweep.source.config, "scenario with an sop section");
  auto* sw_pre = sop_sweep->add_option("--preset", sweep.source.preset, "shipped scenario")
                     ->check(CLI::IsMember(snow::preset_names()));
  auto* sw_gen = sop_sweep->add_option("--generate-bs", sweep.generate_bs,
                                       "sweep a generated instance with this many base stations");
  sw_inst->excludes(sw_cfg)->excludes(sw_pre)->excludes(sw_gen);
  sw_cfg->excludes(sw_pre)->excludes(sw_gen);
  sw_pre->excludes(sw_gen);
  sop_sweep->add_option("--algo", sweep.source.algo, "approx");
  sop_sweep->add_option("--seeds", sweep.seeds, "number of seeds");
  sop_sweep->add_option("--base-seed", sweep.base_seed, "first seed of the derived sequence");
  sop_sweep->add_option("--jobs", sweep.jobs, "worker threads (default: all cores)");
  sop_sweep->add_option("--universe", sweep.universe, "generated: subcarrier ids 0..U-1");
  sop_sweep->add_option("--availability-p", sweep.availability_p, "generated: availability chance");
  sop_sweep->add_option("--sigma-fraction", sweep.sigma_fraction, "generated: sigma_i / |Z_i|");
  sop_sweep->add_option("--instance-seed", sweep.instance_seed, "generated: instance seed");
  sop_sweep->add_option("--out", sweep.source.out, "write the statistics YAML here");

  BenchArgs bench;
  auto* phy_bench = app.add_subcommand("phy-bench", "asynchronous D-OFDM loopback through the G-FFT");
  auto* pb_cfg = phy_bench->add_option("--config", bench.config, "scenario supplying band and PHY");
  auto* pb_pre = phy_bench->add_option("--preset", bench.preset, "shipped scenario")
                     ->check(CLI::IsMember(snow::preset_names()));
  pb_cfg->excludes(pb_pre);
  phy_bench->add_option("--trials", bench.trials, "rounds of one packet per subcarrier");
  phy_bench->add_option("--max-offset", bench.max_offset, "largest random start offset in chips");
  phy_bench->add_option("--snr-db", bench.snr_db, "per-sample SNR (default noiseless)");
  phy_bench->add_option("--window", bench.window, "none | blackman_harris")
      ->check(CLI::IsMember({"none", "blackman_harris"}));
  phy_bench->add_option("--seed", bench.seed, "seed");
  phy_bench->add_option("--papr-frames", bench.papr_frames, "also report the BPSK PAPR tail");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "measure the SNR -> chip error table");
  auto* ca_cfg = calibrate->add_option("--config", cal.config, "scenario supplying band and PHY");
  auto* ca_pre = calibrate->add_option("--preset", cal.preset, "shipped scenario")
                     ->check(CLI::IsMember(snow::preset_names()));
  ca_cfg->excludes(ca_pre);
  calibrate->add_option("--snr-min", cal.opt.snr_min_db, "lowest SNR in dB");
  calibrate->add_option("--snr-max", cal.opt.snr_max_db, "highest SNR in dB");
  calibrate->add_option("--step", cal.opt.snr_step_db, "grid step in dB");
  calibrate->add_option("--chips", cal.opt.chips_per_point, "chips per grid point");
  calibrate->add_option("--seed", cal.opt.seed, "seed");
  calibrate->add_option("--out", cal.out, "table path (default <out dir>/calibration.yaml)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*sop_solve) return run_sop_solve(solve);
    if (*sop_sweep) return run_sop_sweep(sweep);
    if (*phy_bench) return run_phy_bench(bench);
    if (*calibrate) return run_calibrate(cal);
  } catch (const IoError& e) {
    std::cerr << "snowctl: " << e.what() << "\n";
    return kIoFailure;
  } catch (const snow::ConfigError& e) {
    std::cerr << "snowctl: invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const snow::Error& e) {
    std::cerr << "snowctl: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "snowctl: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
