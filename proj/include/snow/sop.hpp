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

#ifndef SNOW_SOP_HPP_
#define SNOW_SOP_HPP_

// Spectrum allocation across a tree of base stations. Each BS i gets a set
// X_i drawn from its available subcarriers Z_i so that the total number of
// assigned subcarriers is maximal, subject to:
//   (1) sigma_i <= |X_i| <= |Z_i|
//   (2) 1 <= |X_i & X_p(i)| <= phi(i, p(i))          for every tree link
//   (3) |X_i & X_j| <= phi(i, j)                      for other interferers

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "snow/error.hpp"
#include "snow/rng.hpp"

namespace snow::sop {

using SubcarrierSet = std::set<int>;
using Allocation = std::vector<SubcarrierSet>;

inline constexpr double kDefaultPhiFraction = 0.6;
inline constexpr std::size_t kBruteForceLimit = 24;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct BaseStation {
  int parent = -1;  // -1 for the root
  Point position;
  SubcarrierSet availability;
  std::size_t sigma = 0;
  bool operator==(const BaseStation&) const = default;
};

inline std::size_t common(const SubcarrierSet& a, const SubcarrierSet& b) {
  std::size_t n = 0;
  for (int x : a) n += b.contains(x);
  return n;
}

inline SubcarrierSet intersection(const SubcarrierSet& a, const SubcarrierSet& b) {
  SubcarrierSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

struct SopInstance {
  std::vector<BaseStation> bs;
  std::vector<std::set<std::size_t>> interferers;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> phi_overrides;  // key (min, max)
  double omega_hz = 400e3;
  double alpha = 0.5;

  std::size_t size() const { return bs.size(); }

  bool is_tree_link(std::size_t i, std::size_t j) const {
    return bs[i].parent == static_cast<int>(j) || bs[j].parent == static_cast<int>(i);
  }

  std::vector<std::size_t> children(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < bs.size(); ++c) {
      if (bs[c].parent == static_cast<int>(i)) out.push_back(c);
    }
    return out;
  }

  std::size_t phi(std::size_t i, std::size_t j) const {
    auto it = phi_overrides.find(std::minmax(i, j));
    if (it != phi_overrides.end()) return it->second;
    const double shared = static_cast<double>(common(bs[i].availability, bs[j].availability));
    return static_cast<std::size_t>(std::floor(kDefaultPhiFraction * shared));
  }

  std::size_t total_availability() const {
    std::size_t n = 0;
    for (const auto& b : bs) n += b.availability.size();
    return n;
  }

  void validate() const {
    const std::size_t n = bs.size();
    if (n == 0) throw Error("instance has no base stations");
    if (interferers.size() != n) throw Error("interferer list does not match BS count");
    if (bs[0].parent != -1) throw Error("BS 0 must be the root");
    for (std::size_t i = 1; i < n; ++i) {
      const int p = bs[i].parent;
      if (p < 0 || static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(p) == i) {
        throw Error("BS " + std::to_string(i) + " has an invalid parent");
      }
      // Walking up must reach the root within n steps.
      std::size_t cur = i, steps = 0;
      while (cur != 0) {
        cur = static_cast<std::size_t>(bs[cur].parent);
        if (++steps > n) throw Error("parent pointers do not form a tree");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (interferers[i].contains(i)) throw Error("BS " + std::to_string(i) + " interferes with itself");
      for (std::size_t j : interferers[i]) {
        if (j >= n) throw Error("interferer index out of range");
        if (!interferers[j].contains(i)) throw Error("interference must be symmetric");
      }
      if (i > 0 && !interferers[i].contains(static_cast<std::size_t>(bs[i].parent))) {
        throw Error("BS " + std::to_string(i) + " must interfere with its parent");
      }
      if (bs[i].sigma > bs[i].availability.size()) {
        throw Error("BS " + std::to_string(i) + " requires more subcarriers than available");
      }
    }
    for (const auto& [key, value] : phi_overrides) {
      if (key.first >= n || key.second >= n || key.first == key.second) {
        throw Error("phi override names an invalid BS pair");
      }
    }
  }

  bool operator==(const SopInstance&) const = default;
};

// Interference from positions: BSs within `radius` interfere; tree neighbours
// always do.
inline void derive_interferers(SopInstance& inst, double radius_m) {
  const std::size_t n = inst.size();
  inst.interferers.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(inst.bs[i].position.x - inst.bs[j].position.x,
                                  inst.bs[i].position.y - inst.bs[j].position.y);
      if (d <= radius_m || inst.is_tree_link(i, j)) {
        inst.interferers[i].insert(j);
        inst.interferers[j].insert(i);
      }
    }
  }
}

inline std::size_t objective(const Allocation& x) {
  std::size_t n = 0;
  for (const auto& s : x) n += s.size();
  return n;
}

// --- feasibility ------------------------------------------------------------

struct Violation {
  int constraint = 0;  // 1, 2 or 3
  int i = -1;
  int j = -1;  // -1 for per-BS violations
  std::string detail;
  bool operator==(const Violation&) const = default;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  bool operator==(const FeasibilityReport&) const = default;
};

inline FeasibilityReport check_feasibility(const SopInstance& inst, const Allocation& x) {
  if (x.size() != inst.size()) throw Error("allocation does not match the instance");
  FeasibilityReport r;
  auto add = [&](int c, std::size_t i, int j, std::string d) {
    r.violations.push_back({c, static_cast<int>(i), j, std::move(d)});
  };
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& z = inst.bs[i].availability;
    if (!std::includes(z.begin(), z.end(), x[i].begin(), x[i].end())) {
      add(1, i, -1, "assigned subcarrier outside availability");
    }
    if (x[i].size() < inst.bs[i].sigma) {
      add(1, i, -1,
          "|X| = " + std::to_string(x[i].size()) + " < sigma = " +
              std::to_string(inst.bs[i].sigma));
    }
  }
  for (std::size_t i = 1; i < inst.size(); ++i) {
    const auto p = static_cast<std::size_t>(inst.bs[i].parent);
    const std::size_t ov = common(x[i], x[p]);
    if (ov < 1) add(2, i, static_cast<int>(p), "tree link shares no subcarrier");
    if (ov > inst.phi(i, p)) {
      add(2, i, static_cast<int>(p),
          "overlap " + std::to_string(ov) + " > phi " + std::to_string(inst.phi(i, p)));
    }
  }
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (std::size_t j : inst.interferers[i]) {
      if (j <= i || inst.is_tree_link(i, j)) continue;
      const std::size_t ov = common(x[i], x[j]);
      if (ov > inst.phi(i, j)) {
        add(3, i, static_cast<int>(j),
            "overlap " + std::to_string(ov) + " > phi " + std::to_string(inst.phi(i, j)));
      }
    }
  }
  r.feasible = r.violations.empty();
  return r;
}

struct SolveResult {
  Allocation allocation;
  std::size_t objective = 0;
  FeasibilityReport report;
};

inline SolveResult finish(const SopInstance& inst, Allocation x) {
  SolveResult r;
  r.objective = objective(x);
  r.report = check_feasibility(inst, x);
  r.allocation = std::move(x);
  return r;
}

// --- greedy heuristic -------------------------------------------------------

// Starts from X = Z and, for every interfering pair, walks the shared
// subcarriers in ascending order deleting them from the larger side (ties go
// to i) until the overlap cap holds or both sides sit at their minimum. The
// walk may remove the last shared subcarrier of a tree link; the attached
// report flags that instead of the algorithm guarding it.
inline SolveResult greedy_allocate(const SopInstance& inst) {
  inst.validate();
  Allocation x;
  for (const auto& b : inst.bs) x.push_back(b.availability);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (std::size_t j : inst.interferers[i]) {
      const std::size_t cap = inst.phi(i, j);
      const SubcarrierSet shared = intersection(inst.bs[i].availability, inst.bs[j].availability);
      for (int xl : shared) {
        if (common(x[i], x[j]) <= cap) break;
        if (x[i].size() >= x[j].size() && x[i].size() > inst.bs[i].sigma) {
          x[i].erase(xl);
        } else if (x[j].size() > inst.bs[j].sigma) {
          x[j].erase(xl);
        }
      }
    }
  }
  return finish(inst, std::move(x));
}

// --- randomized 1/2-approximation ------------------------------------------

// Every (subcarrier, BS) pair with the subcarrier available at that BS gets
// an independent fair coin. If any BS ends short of sigma, a second round of
// coins runs over every BS's leftovers and the two rounds are united.
inline SolveResult approx_allocate(const SopInstance& inst, std::uint64_t seed) {
  inst.validate();
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  SubcarrierSet universe;
  for (const auto& b : inst.bs) universe.insert(b.availability.begin(), b.availability.end());

  const std::size_t n = inst.size();
  Allocation x(n);
  for (int xl : universe) {
    for (std::size_t i = 0; i < n; ++i) {
      if (inst.bs[i].availability.contains(xl) && coin(rng)) x[i].insert(xl);
    }
  }
  bool short_of_sigma = false;
  for (std::size_t i = 0; i < n; ++i) short_of_sigma |= x[i].size() < inst.bs[i].sigma;
  if (short_of_sigma) {
    Allocation first = x;
    for (int xl : universe) {
      for (std::size_t i = 0; i < n; ++i) {
        if (inst.bs[i].availability.contains(xl) && !first[i].contains(xl) && coin(rng)) {
          x[i].insert(xl);
        }
      }
    }
  }
  return finish(inst, std::move(x));
}

// --- exhaustive oracle ------------------------------------------------------

struct OptimalResult {
  bool feasible = false;
  Allocation allocation;
  std::size_t objective = 0;
};

inline OptimalResult brute_force_optimal(const SopInstance& inst) {
  inst.validate();
  const std::size_t n = inst.size();
  if (inst.total_availability() > kBruteForceLimit) {
    throw Error("instance too large for exhaustive search (sum |Z| > " +
                std::to_string(kBruteForceLimit) + ")");
  }
  // Global bit per distinct subcarrier.
  std::map<int, int> bit;
  for (const auto& b : inst.bs) {
    for (int x : b.availability) bit.emplace(x, 0);
  }
  int next = 0;
  for (auto& [x, b] : bit) b = next++;
  std::vector<std::uint32_t> zmask(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int x : inst.bs[i].availability) zmask[i] |= 1u << bit[x];
  }

  struct PairCap {
    std::size_t j;
    std::size_t lo, hi;
  };
  std::vector<std::vector<PairCap>> earlier(n);  // constraints against lower indices
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : inst.interferers[i]) {
      if (j >= i) continue;
      earlier[i].push_back({j, inst.is_tree_link(i, j) ? 1u : 0u, inst.phi(i, j)});
    }
  }
  std::vector<std::size_t> suffix(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + inst.bs[i].availability.size();

  OptimalResult best;
  std::vector<std::uint32_t> cur(n, 0), best_masks;
  auto dfs = [&](auto&& self, std::size_t i, std::size_t value) -> void {
    if (i == n) {
      if (!best.feasible || value > best.objective) {
        best.feasible = true;
        best.objective = value;
        best_masks = cur;
      }
      return;
    }
    if (best.feasible && value + suffix[i] <= best.objective) return;
    const std::uint32_t z = zmask[i];
    // Enumerate submasks of z from the full set downwards.
    for (std::uint32_t s = z;; s = (s - 1) & z) {
      const auto size = static_cast<std::size_t>(std::popcount(s));
      bool ok = size >= inst.bs[i].sigma;
      for (const auto& c : earlier[i]) {
        if (!ok) break;
        const auto ov = static_cast<std::size_t>(std::popcount(s & cur[c.j]));
        ok = ov >= c.lo && ov <= c.hi;
      }
      if (ok) {
        cur[i] = s;
        self(self, i + 1, value + size);
      }
      if (s == 0) break;
    }
  };
  dfs(dfs, 0, 0);

  if (best.feasible) {
    best.allocation.assign(n, {});
    for (const auto& [x, b] : bit) {
      for (std::size_t i = 0; i < n; ++i) {
        if (best_masks[i] >> b & 1u) best.allocation[i].insert(x);
      }
    }
  }
  return best;
}

// Dispatches by name: "greedy", "approx" or "optimal". An infeasible
// exhaustive search throws.
inline SolveResult solve(const SopInstance& inst, const std::string& algorithm,
                         std::uint64_t seed = 1) {
  if (algorithm == "greedy") return greedy_allocate(inst);
  if (algorithm == "approx") return approx_allocate(inst, seed);
  if (algorithm == "optimal") {
    auto r = brute_force_optimal(inst);
    if (!r.feasible) throw Error("instance has no feasible allocation");
    return finish(inst, std::move(r.allocation));
  }
  throw Error("unknown SOP algorithm '" + algorithm + "' (greedy, approx, optimal)");
}

// --- tree links -------------------------------------------------------------

using TreeLink = std::pair<std::size_t, std::size_t>;  // (child, parent)

// Gives every tree link a subcarrier shared by both ends, all distinct:
// smallest id first, backtracking on conflicts.
inline std::map<TreeLink, int> assign_tree_links(const SopInstance& inst, const Allocation& x) {
  std::vector<TreeLink> links;
  std::vector<SubcarrierSet> candidates;
  for (std::size_t i = 1; i < inst.size(); ++i) {
    const auto p = static_cast<std::size_t>(inst.bs[i].parent);
    links.emplace_back(i, p);
    candidates.push_back(intersection(x.at(i), x.at(p)));
  }
  std::vector<int> chosen(links.size());
  std::set<int> used;
  auto solve = [&](auto&& self, std::size_t k) -> bool {
    if (k == links.size()) return true;
    for (int f : candidates[k]) {
      if (used.contains(f)) continue;
      used.insert(f);
      chosen[k] = f;
      if (self(self, k + 1)) return true;
      used.erase(f);
    }
    return false;
  };
  if (!solve(solve, 0)) {
    std::ostringstream msg;
    msg << "link assignment infeasible; blocking links:";
    bool any_empty = false;
    for (std::size_t k = 0; k < links.size(); ++k) any_empty |= candidates[k].empty();
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (any_empty && !candidates[k].empty()) continue;
      msg << ' ' << links[k].first << "->" << links[k].second;
    }
    throw Error(msg.str());
  }
  std::map<TreeLink, int> out;
  for (std::size_t k = 0; k < links.size(); ++k) out[links[k]] = chosen[k];
  return out;
}

// --- BS-BS contention on a tree link ---------------------------------------

struct BackoffResolution {
  int winner = 0;            // 0: side A, 1: side B
  std::int64_t delay = 0;    // winning draw of the last round
  int rounds = 0;
};

// Both ends pick a uniform delay in [0, interval); the earlier goes first,
// ties re-draw.
template <typename R>
BackoffResolution bsbs_backoff_collision(std::int64_t interval, R& rng) {
  if (interval < 2) throw Error("back-off interval must allow two distinct draws");
  std::uniform_int_distribution<std::int64_t> d(0, interval - 1);
  BackoffResolution r;
  for (;;) {
    ++r.rounds;
    const auto a = d(rng);
    const auto b = d(rng);
    if (a == b) continue;
    r.winner = a < b ? 0 : 1;
    r.delay = std::min(a, b);
    return r;
  }
}

// --- instance generation ----------------------------------------------------

enum class Topology { kChain, kStar, kRandomTree };

struct GeneratorParams {
  std::size_t base_stations = 2;
  int universe = 8;             // subcarrier ids 0..universe-1
  double availability_p = 0.5;  // chance each id is available at a BS
  Topology topology = Topology::kRandomTree;
  double extra_interference_p = 0.3;
  double sigma_fraction = 0.0;  // sigma_i = floor(fraction * |Z_i|)
  std::size_t max_total = 0;    // cap on sum |Z_i|, 0 for none

  bool operator==(const GeneratorParams&) const = default;
};

inline SopInstance generate_instance(const GeneratorParams& g, std::uint64_t seed) {
  if (g.base_stations == 0) throw Error("need at least one base station");
  Rng rng(seed);
  std::bernoulli_distribution avail(g.availability_p), extra(g.extra_interference_p);
  SopInstance inst;
  inst.bs.resize(g.base_stations);
  for (std::size_t i = 1; i < g.base_stations; ++i) {
    switch (g.topology) {
      case Topology::kChain: inst.bs[i].parent = static_cast<int>(i - 1); break;
      case Topology::kStar: inst.bs[i].parent = 0; break;
      case Topology::kRandomTree: {
        std::uniform_int_distribution<std::size_t> d(0, i - 1);
        inst.bs[i].parent = static_cast<int>(d(rng));
        break;
      }
    }
  }
  std::size_t total = 0;
  for (auto& b : inst.bs) {
    for (int x = 0; x < g.universe; ++x) {
      if (avail(rng) && (g.max_total == 0 || total < g.max_total)) {
        b.availability.insert(x);
        ++total;
      }
    }
    b.sigma = static_cast<std::size_t>(
        std::floor(g.sigma_fraction * static_cast<double>(b.availability.size())));
  }
  inst.interferers.assign(g.base_stations, {});
  for (std::size_t i = 0; i < g.base_stations; ++i) {
    for (std::size_t j = i + 1; j < g.base_stations; ++j) {
      if (inst.is_tree_link(i, j) || extra(rng)) {
        inst.interferers[i].insert(j);
        inst.interferers[j].insert(i);
      }
    }
  }
  return inst;
}

// --- Monte-Carlo summaries --------------------------------------------------

struct SweepStats {
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double standard_error = 0.0;
  double mean_pair_overlap = 0.0;  // per run, summed over interfering pairs
  double shared_total = 0.0;       // sum over those pairs of |Z_i & Z_j|
  double bound = 0.0;              // sum |Z_i|
};

// Seeds are split into `jobs` contiguous chunks run on separate threads; each
// run only reads the instance. Partial sums are combined in chunk order, so
// a given (seeds, base, jobs) always gives the same numbers.
inline SweepStats approx_sweep(const SopInstance& inst, std::size_t seeds, std::uint64_t base,
                               std::size_t jobs = 1) {
  inst.validate();
  SweepStats s;
  s.runs = seeds;
  s.bound = static_cast<double>(inst.total_availability());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (std::size_t j : inst.interferers[i]) {
      if (j > i) {
        pairs.emplace_back(i, j);
        s.shared_total += static_cast<double>(
            common(inst.bs[i].availability, inst.bs[j].availability));
      }
    }
  }
  if (seeds == 0) return s;

  struct Partial {
    double sum = 0.0, sum2 = 0.0, overlap = 0.0;
  };
  jobs = std::clamp<std::size_t>(jobs, 1, seeds);
  std::vector<Partial> parts(jobs);
  auto work = [&](std::size_t chunk) {
    const std::size_t lo = seeds * chunk / jobs, hi = seeds * (chunk + 1) / jobs;
    Partial& p = parts[chunk];
    for (std::size_t k = lo; k < hi; ++k) {
      const auto r = approx_allocate(inst, derive_seed(base, k));
      const auto v = static_cast<double>(r.objective);
      p.sum += v;
      p.sum2 += v * v;
      for (const auto& [i, j] : pairs) {
        p.overlap += static_cast<double>(common(r.allocation[i], r.allocation[j]));
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t c = 1; c < jobs; ++c) threads.emplace_back(work, c);
  work(0);
  for (auto& t : threads) t.join();

  Partial total;
  for (const auto& p : parts) {
    total.sum += p.sum;
    total.sum2 += p.sum2;
    total.overlap += p.overlap;
  }
  const auto n = static_cast<double>(seeds);
  s.mean = total.sum / n;
  s.stddev = seeds > 1
                 ? std::sqrt(std::max(0.0, (total.sum2 - n * s.mean * s.mean) / (n - 1)))
                 : 0.0;
  s.standard_error = s.stddev / std::sqrt(n);
  s.mean_pair_overlap = total.overlap / n;
  return s;
}

}  // namespace snow::sop

#endif  // SNOW_SOP_HPP_
