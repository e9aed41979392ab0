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


#include "snow/phy/papr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "snow/phy/ofdm.hpp"

namespace snow::phy {
namespace {

TEST(ComputePapr, ConstantEnvelopeIsZero) {
  std::vector<cd> tone(256);
  for (std::size_t n = 0; n < tone.size(); ++n) tone[n] = std::polar(2.0, 0.1 * static_cast<double>(n));
  EXPECT_NEAR(compute_papr(tone), 0.0, 1e-12);
}

TEST(ComputePapr, CoherentPeakOfSixtyFour) {
  std::vector<cd> bins(64, cd{1.0, 0.0}), time(64);
  Fft ifft(64, Fft::Direction::kInverse);
  ifft.execute(bins, time);
  EXPECT_NEAR(compute_papr(time), 10.0 * std::log10(64.0), 1e-9);
}

TEST(ComputePapr, AlwaysNonNegative) {
  for (double v : bpsk_papr_samples(29, 2000, 9)) EXPECT_GE(v, 0.0);
  const auto plan = plan_subcarriers(SpectrumBand{0, 6'000'000, {}}, 400'000, 0.5);
  const auto buf = bs_ofdm_encode({{SubcarrierId{1}, cd{1, 0}}, {SubcarrierId{2}, cd{-1, 0}}}, plan, 64, 1.0);
  EXPECT_GT(compute_papr(buf), 0.0);
}

TEST(ComputePapr, RejectsEmptyAndZero) {
  EXPECT_THROW(compute_papr(std::vector<cd>{}), Error);
  EXPECT_THROW(compute_papr(std::vector<cd>(8)), Error);
}

TEST(PaprTail, PicksOrderStatistic) {
  std::vector<double> v;
  for (int i = 1; i <= 1000; ++i) v.push_back(i);
  EXPECT_EQ(papr_tail(v, 1e-3), 999.0);
  EXPECT_EQ(papr_tail(v, 1e-2), 990.0);
  EXPECT_EQ(papr_tail(v, 0.0), 1000.0);
  EXPECT_THROW(papr_tail({}, 0.1), Error);
}

TEST(BpskPaprSamples, DeterministicAndBounded) {
  const auto a = bpsk_papr_samples(64, 500, 42);
  EXPECT_EQ(a, bpsk_papr_samples(64, 500, 42));
  for (double v : a) EXPECT_LE(v, 10.0 * std::log10(64.0) + 1e-9);
}

}  // namespace
}  // namespace snow::phy
