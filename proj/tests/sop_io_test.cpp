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


#include "snow/sop_io.hpp"

#include <gtest/gtest.h>

namespace snow::sop {
namespace {

const char* kPair = R"(
bs:
  - {id: 0, availability: [1, 2, 3], sigma: 1, interferers: [1]}
  - {id: 1, parent: 0, availability: [2, 3, 4], interferers: [0]}
phi_overrides:
  - {i: 1, j: 0, phi: 2}
)";

TEST(SopIo, ParsesExplicitInstance) {
  const auto inst = instance_from_yaml(YAML::Load(kPair));
  ASSERT_EQ(inst.size(), 2u);
  EXPECT_EQ(inst.bs[0].parent, -1);
  EXPECT_EQ(inst.bs[1].parent, 0);
  EXPECT_EQ(inst.bs[0].sigma, 1u);
  EXPECT_EQ(inst.bs[1].availability, (SubcarrierSet{2, 3, 4}));
  EXPECT_EQ(inst.phi(0, 1), 2u);
}

TEST(SopIo, RoundTripsThroughYaml) {
  GeneratorParams g;
  g.base_stations = 4;
  g.universe = 12;
  g.sigma_fraction = 0.3;
  auto inst = generate_instance(g, 8);
  inst.phi_overrides[{1, 2}] = 3;
  inst.bs[2].position = {120.5, -40.0};
  EXPECT_EQ(instance_from_yaml(YAML::Load(instance_to_yaml(inst))), inst);
}

TEST(SopIo, DerivesInterferenceFromRadius) {
  const auto inst = instance_from_yaml(YAML::Load(R"(
interference_radius_m: 100
bs:
  - {availability: [1], position: [0, 0]}
  - {parent: 0, availability: [1], position: [1000, 0]}
  - {parent: 0, availability: [1], position: [1050, 0]}
)"));
  EXPECT_TRUE(inst.interferers[1].contains(2));
  EXPECT_TRUE(inst.interferers[0].contains(1));
}

TEST(SopIo, ErrorsNameTheField) {
  auto path_of = [](const char* text) {
    try {
      instance_from_yaml(YAML::Load(text));
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("none");
  };
  EXPECT_EQ(path_of("bs: []"), "bs");
  EXPECT_EQ(path_of("bs:\n  - {availability: x, interferers: []}"), "bs[0].availability");
  EXPECT_EQ(path_of("bs:\n  - {id: 3, availability: [1], interferers: []}"), "bs[0].id");
  EXPECT_EQ(path_of("bs:\n  - {availability: [1]}"), "interference_radius_m");
  EXPECT_EQ(path_of("bs:\n  - {availability: [1], sigma: 2, interferers: []}"), "bs");
  EXPECT_THROW(load_instance("/nonexistent/instance.yaml"), ConfigError);
}

TEST(SopIo, SolutionDocumentCarriesReportAndLinks) {
  const auto inst = instance_from_yaml(YAML::Load(kPair));
  const auto r = greedy_allocate(inst);
  const auto links = assign_tree_links(inst, r.allocation);
  const auto doc = YAML::Load(solution_to_yaml(inst, "greedy", r.allocation, r.report, links));
  EXPECT_EQ(doc["algorithm"].as<std::string>(), "greedy");
  EXPECT_EQ(doc["objective"].as<std::size_t>(), r.objective);
  EXPECT_EQ(doc["bound"].as<std::size_t>(), 6u);
  EXPECT_EQ(doc["feasible"].as<bool>(), r.report.feasible);
  EXPECT_EQ(doc["allocation"].size(), 2u);
  ASSERT_EQ(doc["tree_links"].size(), 1u);
  EXPECT_EQ(doc["tree_links"][0]["child"].as<int>(), 1);
  EXPECT_EQ(doc["tree_links"][0]["subcarrier"].as<int>(), links.at({1, 0}));
}

TEST(SopIo, ShippedWorkedInstanceLoads) {
  const auto inst = load_instance(SNOW_SOURCE_DIR "/scenarios/sop-worked-2bs.yaml");
  EXPECT_EQ(greedy_allocate(inst).objective, 14u);
}

}  // namespace
}  // namespace snow::sop
