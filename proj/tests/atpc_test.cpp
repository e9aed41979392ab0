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


#include "snow/atpc.hpp"

#include <gtest/gtest.h>

#include <random>

#include "snow/rng.hpp"

namespace snow::atpc {
namespace {

std::vector<double> levels() {
  std::vector<double> tp;
  for (int i = 0; i <= 15; ++i) tp.push_back(i);
  return tp;
}

PowerModel law_model() {
  std::vector<double> tp = levels(), pdr;
  for (double t : tp) pdr.push_back(5.0 * t + 20.0);
  return fit_initial(tp, pdr, tp, 90.0);
}

TEST(FitInitial, ExactLinearData) {
  const auto m = law_model();
  EXPECT_NEAR(m.a_hat, 5.0, 1e-12);
  EXPECT_NEAR(m.b_hat, 20.0, 1e-12);
  EXPECT_FALSE(m.degenerate);
}

TEST(FitInitial, TwoPoints) {
  const std::vector<double> tp{0, 10}, pdr{20, 70};
  const auto m = fit_initial(tp, pdr);
  EXPECT_NEAR(m.a_hat, 5.0, 1e-12);
  EXPECT_NEAR(m.b_hat, 20.0, 1e-12);
}

TEST(FitInitial, LeastSquaresOptimal) {
  Rng rng = make_rng(1, 0);
  std::normal_distribution<double> noise(0.0, 3.0), eps(0.0, 0.05);
  const auto tp = levels();
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<double> pdr;
    for (double t : tp) pdr.push_back(4.0 * t + 25.0 + noise(rng));
    const auto m = fit_initial(tp, pdr);
    auto sse = [&](double a, double b) {
      double s = 0;
      for (std::size_t i = 0; i < tp.size(); ++i) s += (pdr[i] - a * tp[i] - b) * (pdr[i] - a * tp[i] - b);
      return s;
    };
    const double best = sse(m.a_hat, m.b_hat);
    for (int k = 0; k < 100; ++k) EXPECT_GE(sse(m.a_hat + eps(rng), m.b_hat + eps(rng)), best);
  }
}

TEST(FitInitial, Errors) {
  const std::vector<double> same{3, 3, 3}, pdr{1, 2, 3};
  try {
    fit_initial(same, pdr);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "collinear power samples");
  }
  EXPECT_THROW(fit_initial(std::vector<double>{1}, std::vector<double>{1}), Error);
  EXPECT_THROW(fit_initial(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(fit_initial(std::vector<double>{1, 2}, std::vector<double>{1, 2}, {2, 1}, 90), Error);
  // Repeated probes at the same levels are fine.
  const std::vector<double> rep{0, 0, 5, 5}, rep_pdr{20, 20, 45, 45};
  const auto m = fit_initial(rep, rep_pdr);
  EXPECT_EQ(m.tp_levels, (std::vector<double>{0, 5}));
  EXPECT_NEAR(m.a_hat, 5.0, 1e-12);
}

TEST(FitInitial, NonPhysicalSlopePinsMaxPower) {
  const std::vector<double> tp{0, 5, 10}, pdr{90, 80, 70};
  const auto m = fit_initial(tp, pdr, levels(), 90.0);
  EXPECT_TRUE(m.degenerate);
  EXPECT_EQ(select_power(m), 15.0);
}

TEST(SelectPower, FormulaNearestAndClamp) {
  auto m = law_model();
  EXPECT_NEAR(raw_power(m), 14.0, 1e-12);
  EXPECT_EQ(select_power(m), 14.0);
  m.b_hat = 90.0 - 5.0 * 14.4;
  EXPECT_EQ(select_power(m), 14.0);
  m.b_hat = 90.0 - 5.0 * 22.0;
  EXPECT_EQ(select_power(m), 15.0);
  m.b_hat = 200.0;
  EXPECT_EQ(select_power(m), 0.0);
}

TEST(SelectPower, AffineRelabelingInvariant) {
  auto m = law_model();
  for (double b : {12.0, 31.0, 47.5, 66.0}) {
    m.b_hat = b;
    const double base = select_power(m);
    // Shift every level (and the model) by 3 dBm: the chosen index is unchanged.
    PowerModel shifted = m;
    for (auto& l : shifted.tp_levels) l += 3.0;
    shifted.b_hat = b - 3.0 * m.a_hat;
    EXPECT_EQ(select_power(shifted), base + 3.0);
  }
}

TEST(UpdateModel, InterceptOnly) {
  const auto m = law_model();
  const std::vector<double> on{90, 90, 90}, low{80, 80};
  EXPECT_EQ(update_model(m, on), m);
  const auto u = update_model(m, low);
  EXPECT_NEAR(u.b_hat, 10.0, 1e-12);
  EXPECT_EQ(u.a_hat, m.a_hat);
  EXPECT_NEAR(raw_power(u), raw_power(m) + 2.0, 1e-12);
  auto mid = m;
  mid.b_hat = 30.0;
  EXPECT_EQ(select_power(update_model(mid, low)), select_power(mid) + 2.0);
  EXPECT_THROW(update_model(m, std::vector<double>{}), Error);
}

TEST(UpdateModel, FixedPointWhenLawHolds) {
  const auto m = law_model();
  const double tp = select_power(m);
  const std::vector<double> readings{m.a_hat * tp + m.b_hat};
  EXPECT_EQ(select_power(update_model(m, readings)), tp);
}

TEST(UpdateModel, LowerPdrNeverLowersPower) {
  const auto m = law_model();
  double prev = -1;
  for (double pdr = 100; pdr >= 0; pdr -= 5) {
    const double p = select_power(update_model(m, std::vector<double>{pdr}));
    if (prev >= 0) {
      EXPECT_GE(p, prev);
    }
    prev = p;
  }
}

TEST(UpdateModel, ClosedLoopConverges) {
  for (double b_true : {15.0, 25.0, 30.0, 40.0, 50.0}) {
    auto law = [&](double tp) { return std::clamp(5.0 * tp + b_true, 0.0, 100.0); };
    const double crossing = (90.0 - b_true) / 5.0;
    auto m = law_model();
    int rounds = 0;
    double tp = select_power(m);
    while (std::abs(tp - crossing) > 1.0 && rounds < 10) {
      m = update_model(m, std::vector<double>{law(tp)});
      tp = select_power(m);
      ++rounds;
    }
    EXPECT_LE(rounds, 5) << "b_true " << b_true;
    for (int extra = 0; extra < 5; ++extra) {
      m = update_model(m, std::vector<double>{law(tp)});
      tp = select_power(m);
      EXPECT_LE(std::abs(tp - crossing), 1.0);
    }
  }
}

TEST(ShouldUpdate, Triggers) {
  const auto m = law_model();
  const TriggerPolicy p;
  EXPECT_FALSE(should_update(p, m, false, 0.0, 88.0));
  EXPECT_TRUE(should_update(p, m, true, 0.0, 99.0));
  EXPECT_TRUE(should_update(p, m, false, 51.0, 99.0));
  EXPECT_TRUE(should_update(p, m, false, 0.0, 84.9));
}

}  // namespace
}  // namespace snow::atpc
