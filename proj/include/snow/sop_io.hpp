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

#ifndef SNOW_SOP_IO_HPP_
#define SNOW_SOP_IO_HPP_

// YAML documents for SOP instances and solutions.
//
// Instance:
//   omega_hz: 400000            # optional
//   alpha: 0.5                  # optional
//   interference_radius_m: 800  # used when no BS lists `interferers`
//   bs:
//     - id: 0                   # must equal the list position
//       parent: -1              # -1 or omitted for the root
//       position: [0, 0]        # optional, metres
//       availability: [1, 2, 3]
//       sigma: 1                # optional, default 0
//       interferers: [1]        # optional, explicit interference set
//   phi_overrides:              # optional
//     - {i: 0, j: 1, phi: 4}
//
// Solution:
//   algorithm, objective, bound, feasible, allocation (per-BS lists),
//   violations (constraint, i, j, detail), tree_links (child, parent, subcarrier).

#include <map>
#include <optional>
#include <string>

#include <yaml-cpp/yaml.h>

#include "snow/error.hpp"
#include "snow/sop.hpp"

namespace snow::sop {

namespace io_detail {

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "wrong type");
  }
}

}  // namespace io_detail

inline SopInstance instance_from_yaml(const YAML::Node& doc) {
  using io_detail::scalar;
  if (!doc.IsMap()) throw ConfigError("", "instance must be a mapping");
  SopInstance inst;
  if (doc["omega_hz"]) inst.omega_hz = scalar<double>(doc["omega_hz"], "omega_hz");
  if (doc["alpha"]) inst.alpha = scalar<double>(doc["alpha"], "alpha");
  const auto list = doc["bs"];
  if (!list || !list.IsSequence() || list.size() == 0) {
    throw ConfigError("bs", "expected a non-empty list");
  }
  bool explicit_interference = false;
  std::vector<std::set<std::size_t>> given(list.size());
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = "bs[" + std::to_string(k) + "]";
    const auto b = list[k];
    if (b["id"] && scalar<std::size_t>(b["id"], p + ".id") != k) {
      throw ConfigError(p + ".id", "ids must equal list positions");
    }
    BaseStation s;
    if (b["parent"] && !b["parent"].IsNull()) s.parent = scalar<int>(b["parent"], p + ".parent");
    if (b["position"]) {
      if (!b["position"].IsSequence() || b["position"].size() != 2) {
        throw ConfigError(p + ".position", "expected [x, y]");
      }
      s.position = {scalar<double>(b["position"][0], p + ".position"),
                    scalar<double>(b["position"][1], p + ".position")};
    }
    if (!b["availability"] || !b["availability"].IsSequence()) {
      throw ConfigError(p + ".availability", "expected a list of subcarrier ids");
    }
    for (const auto& x : b["availability"]) s.availability.insert(scalar<int>(x, p + ".availability"));
    if (b["sigma"]) s.sigma = scalar<std::size_t>(b["sigma"], p + ".sigma");
    if (b["interferers"]) {
      explicit_interference = true;
      for (const auto& j : b["interferers"]) {
        given[k].insert(scalar<std::size_t>(j, p + ".interferers"));
      }
    }
    inst.bs.push_back(std::move(s));
  }
  if (explicit_interference) {
    inst.interferers = given;
  } else if (doc["interference_radius_m"]) {
    derive_interferers(inst, scalar<double>(doc["interference_radius_m"], "interference_radius_m"));
  } else {
    throw ConfigError("interference_radius_m", "needed when no BS lists interferers");
  }
  if (const auto ov = doc["phi_overrides"]) {
    for (std::size_t k = 0; k < ov.size(); ++k) {
      const std::string p = "phi_overrides[" + std::to_string(k) + "]";
      const auto i = scalar<std::size_t>(ov[k]["i"], p + ".i");
      const auto j = scalar<std::size_t>(ov[k]["j"], p + ".j");
      inst.phi_overrides[std::minmax(i, j)] = scalar<std::size_t>(ov[k]["phi"], p + ".phi");
    }
  }
  try {
    inst.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("bs", e.what());
  }
  return inst;
}

inline SopInstance load_instance(const std::string& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path, "cannot open file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path, e.what());
  }
  return instance_from_yaml(doc);
}

inline void emit_instance(YAML::Emitter& out, const SopInstance& inst) {
  out << YAML::BeginMap;
  out << YAML::Key << "omega_hz" << YAML::Value << inst.omega_hz;
  out << YAML::Key << "alpha" << YAML::Value << inst.alpha;
  out << YAML::Key << "bs" << YAML::Value << YAML::BeginSeq;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& b = inst.bs[i];
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << i;
    out << YAML::Key << "parent" << YAML::Value << b.parent;
    out << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << b.position.x << b.position.y << YAML::EndSeq;
    out << YAML::Key << "availability" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int x : b.availability) out << x;
    out << YAML::EndSeq;
    out << YAML::Key << "sigma" << YAML::Value << b.sigma;
    out << YAML::Key << "interferers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto j : inst.interferers[i]) out << j;
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (!inst.phi_overrides.empty()) {
    out << YAML::Key << "phi_overrides" << YAML::Value << YAML::BeginSeq;
    for (const auto& [k, v] : inst.phi_overrides) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "i" << YAML::Value << k.first
          << YAML::Key << "j" << YAML::Value << k.second << YAML::Key << "phi" << YAML::Value
          << v << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

inline std::string instance_to_yaml(const SopInstance& inst) {
  YAML::Emitter out;
  emit_instance(out, inst);
  return out.c_str();
}

inline std::string solution_to_yaml(const SopInstance& inst, const std::string& algorithm,
                                    const Allocation& x, const FeasibilityReport& report,
                                    const std::optional<std::map<TreeLink, int>>& links) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "algorithm" << YAML::Value << algorithm;
  out << YAML::Key << "objective" << YAML::Value << objective(x);
  out << YAML::Key << "bound" << YAML::Value << inst.total_availability();
  out << YAML::Key << "feasible" << YAML::Value << report.feasible;
  out << YAML::Key << "allocation" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : x) {
    out << YAML::Flow << YAML::BeginSeq;
    for (int v : s) out << v;
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "violations" << YAML::Value << YAML::BeginSeq;
  for (const auto& v : report.violations) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "constraint" << YAML::Value
        << v.constraint << YAML::Key << "i" << YAML::Value << v.i << YAML::Key << "j"
        << YAML::Value << v.j << YAML::Key << "detail" << YAML::Value << v.detail
        << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (links) {
    out << YAML::Key << "tree_links" << YAML::Value << YAML::BeginSeq;
    for (const auto& [link, f] : *links) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "child" << YAML::Value << link.first
          << YAML::Key << "parent" << YAML::Value << link.second << YAML::Key << "subcarrier"
          << YAML::Value << f << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return out.c_str();
}

}  // namespace snow::sop

#endif  // SNOW_SOP_IO_HPP_
