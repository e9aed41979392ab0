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


#include "snow/spectrum.hpp"

#include <gtest/gtest.h>

namespace snow {
namespace {

constexpr Hz kMHz = 1'000'000;
constexpr Hz kKHz = 1'000;

SpectrumBand band(Hz lo, Hz hi) { return SpectrumBand{lo, hi, {}}; }

TEST(PlanSubcarriers, SixMegahertzGives29) {
  const auto plan = plan_subcarriers(band(547 * kMHz, 553 * kMHz), 400 * kKHz, 0.5);
  EXPECT_EQ(plan.size(), 29u);
  EXPECT_EQ(plan.usable_count(), 29u);
  EXPECT_EQ(plan.spacing_hz(), 200 * kKHz);
}

TEST(PlanSubcarriers, SingleSubcarrierBand) {
  const auto plan = plan_subcarriers(band(0, 400 * kKHz), 400 * kKHz, 0.5);
  EXPECT_EQ(plan.size(), 1u);
  EXPECT_EQ(plan.center({0}), 200 * kKHz);
}

TEST(PlanSubcarriers, OccupiedMiddleLeavesEdges) {
  SpectrumBand b = band(0, 8 * kMHz);
  b.occupied.push_back({1 * kMHz, 7 * kMHz});
  const auto plan = plan_subcarriers(b, 400 * kKHz, 0.5);
  ASSERT_EQ(plan.size(), 39u);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Hz c = plan.center({i});
    const bool inside_edge = c - 200 * kKHz >= 0 && c + 200 * kKHz <= 1 * kMHz;
    const bool inside_top = c - 200 * kKHz >= 7 * kMHz && c + 200 * kKHz <= 8 * kMHz;
    EXPECT_EQ(plan.usable({i}), inside_edge || inside_top) << "index " << i;
  }
  // 0.2, 0.4, 0.6, 0.8 MHz at the bottom and 7.2 .. 7.8 MHz at the top.
  EXPECT_EQ(plan.usable_count(), 8u);
}

TEST(PlanSubcarriers, RejectsNarrowBandAndBadOverlap) {
  EXPECT_THROW(
      {
        try {
          plan_subcarriers(band(0, 300 * kKHz), 400 * kKHz, 0.5);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "band too narrow");
          throw;
        }
      },
      Error);
  for (double a : {0.0, -0.1, 0.51, 1.0}) {
    try {
      plan_subcarriers(band(0, 6 * kMHz), 400 * kKHz, a);
      ADD_FAILURE() << "overlap " << a << " accepted";
    } catch (const Error& e) {
      EXPECT_STREQ(e.what(), "invalid overlap");
    }
  }
}

TEST(PlanSubcarriers, RejectsMalformedBands) {
  EXPECT_THROW(plan_subcarriers(band(10, 10), 400 * kKHz, 0.5), Error);
  SpectrumBand overlapping = band(0, 6 * kMHz);
  overlapping.occupied = {{1 * kMHz, 3 * kMHz}, {2 * kMHz, 4 * kMHz}};
  EXPECT_THROW(plan_subcarriers(overlapping, 400 * kKHz, 0.5), Error);
  SpectrumBand outside = band(0, 6 * kMHz);
  outside.occupied = {{5 * kMHz, 7 * kMHz}};
  EXPECT_THROW(plan_subcarriers(outside, 400 * kKHz, 0.5), Error);
}

TEST(SubcarrierCenter, ChannelEdges) {
  const auto plan = plan_subcarriers(band(547 * kMHz, 553 * kMHz), 400 * kKHz, 0.5);
  EXPECT_EQ(subcarrier_center(plan, {0}), 547'200'000);
  EXPECT_EQ(subcarrier_center(plan, {1}), 547'400'000);
  EXPECT_EQ(subcarrier_center(plan, {28}), 552'800'000);
  EXPECT_THROW(subcarrier_center(plan, {29}), Error);
}

TEST(SubcarrierPlanProperties, SpacingIsExactMultiple) {
  const auto plan = plan_subcarriers(band(470 * kMHz, 478 * kMHz), 400 * kKHz, 0.5);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    for (std::size_t j = i + 1; j < plan.size(); ++j) {
      EXPECT_EQ((plan.center({j}) - plan.center({i})) % plan.spacing_hz(), 0);
    }
  }
}

TEST(SubcarrierPlanProperties, DeterministicAndMonotoneInOccupancy) {
  SpectrumBand b = band(547 * kMHz, 553 * kMHz);
  const auto a = plan_subcarriers(b, 400 * kKHz, 0.5);
  EXPECT_EQ(a, plan_subcarriers(b, 400 * kKHz, 0.5));

  b.occupied.push_back({548 * kMHz, 549 * kMHz});
  const auto c = plan_subcarriers(b, 400 * kKHz, 0.5);
  b.occupied.push_back({551 * kMHz, 551'500'000});
  const auto d = plan_subcarriers(b, 400 * kKHz, 0.5);
  EXPECT_EQ(a.centers(), c.centers());
  EXPECT_EQ(c.centers(), d.centers());
  EXPECT_LE(c.usable_count(), a.usable_count());
  EXPECT_LE(d.usable_count(), c.usable_count());
  EXPECT_LT(d.usable_count(), a.usable_count());
}

TEST(SubcarrierPlanProperties, FractionalRatioUsesFloor) {
  // 6.1 MHz / 200 kHz = 30.5 slots.
  const auto plan = plan_subcarriers(band(0, 6'100'000), 400 * kKHz, 0.5);
  EXPECT_EQ(plan.size(), 29u);
}

TEST(SubcarrierPlan, WithoutAndRestrictKeepIndices) {
  const auto plan = plan_subcarriers(band(547 * kMHz, 553 * kMHz), 400 * kKHz, 0.5);
  const auto w = plan.without({3});
  EXPECT_FALSE(w.usable({3}));
  EXPECT_EQ(w.usable_count(), 28u);
  EXPECT_EQ(w.centers(), plan.centers());
  const auto r = plan.restricted_to({{1}, {5}, {7}});
  EXPECT_EQ(r.usable_count(), 3u);
  EXPECT_TRUE(r.usable({5}));
  EXPECT_FALSE(r.usable({6}));
  EXPECT_THROW(plan.restricted_to({{40}}), Error);
}

}  // namespace
}  // namespace snow
