#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eqlink/error.hpp"
#include "eqlink/moment_match.hpp"
#include "eqlink/moments.hpp"
#include "eqlink/pricer.hpp"
#include "test_support.hpp"

using namespace eqlink;
using eqlink::testing::black_scholes_call;
using eqlink::testing::rel_diff;

namespace {

BasketSpec single(double spot, double weight, double vol, double yield = 0.0) {
  return build_basket({{"x", spot, vol, yield, {}}}, {weight});
}

}  // namespace

TEST(AsianCall, SingleLognormalIsBlackScholes) {
  const auto r = asian_call_price(single(100.0, 100.0, 0.2), CorrelationMatrix::identity(1), {{1.0}, 1.0},
                                  {0.05});
  EXPECT_LT(rel_diff(r.value, black_scholes_call(100.0, 100.0, 0.2, 0.05, 0.0, 1.0)), 1e-9);
  EXPECT_EQ(r.branch, PriceBranch::kStrikeAboveShift);
  ASSERT_TRUE(std::holds_alternative<ShiftedLognormalFit>(r.fit));
  EXPECT_NEAR(std::get<ShiftedLognormalFit>(r.fit).a, 0.0, 1e-7);
}

TEST(AsianCall, ZeroVolFlatBasketIsWorthless) {
  const auto r = asian_call_price(single(100.0, 100.0, 0.0), CorrelationMatrix::identity(1), {{1.0}, 1.0},
                                  {0.0});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.branch, PriceBranch::kDegenerate);
}

TEST(AsianCall, ZeroVolPositiveDriftIsDiscountedForward) {
  const auto r = asian_call_price(single(100.0, 100.0, 0.0), CorrelationMatrix::identity(1),
                                  {{1.0, 2.0}, 2.0}, {0.05});
  const double m1 = 100.0 * (std::exp(0.05) + std::exp(0.1)) / 2.0;
  EXPECT_LT(rel_diff(r.value, std::exp(-0.1) * (m1 - 100.0)), 1e-13);
}

TEST(AsianCall, StrikeBelowShiftIsDiscountedForward) {
  // Synthetic deep in-the-money fit: strike below the shift.
  const ShiftedLognormalFit fit{50.0, 2.0, 0.3, false};
  const double m1 = fit.a + std::exp(fit.b + 0.5 * fit.c * fit.c);
  PriceBranch branch;
  const double v = shifted_lognormal_call(fit, 40.0, 0.9, &branch);
  EXPECT_EQ(branch, PriceBranch::kStrikeAtOrBelowShift);
  EXPECT_NEAR(v, 0.9 * (m1 - 40.0), 1e-12 * m1);
}

TEST(AsianCall, BranchContinuityAtShift) {
  for (double c : {0.05, 0.3, 1.0}) {
    const ShiftedLognormalFit fit{10.0, 1.0, c, false};
    const double above = shifted_lognormal_call(fit, fit.a * (1 + 1e-7), 0.95);
    const double at = shifted_lognormal_call(fit, fit.a, 0.95);
    const double below = shifted_lognormal_call(fit, fit.a * (1 - 1e-7), 0.95);
    EXPECT_NEAR(above, at, 1e-8 + 0.95 * fit.a * 1e-7);
    EXPECT_NEAR(below, at, 1e-8 + 0.95 * fit.a * 1e-7);
    // The X > a branch as X approaches a from above converges to the X <= a value.
    const double tiny = shifted_lognormal_call(fit, std::nextafter(fit.a, INFINITY), 0.95);
    EXPECT_NEAR(tiny, at, 1e-8);
  }
}

TEST(AsianCall, PutCallParityOnFittedModel) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int i = 0; i < 300; ++i) {
    const auto inst = eqlink::testing::random_instance(rng, 5, 12);
    const auto m = asian_moments(inst.basket, inst.corr, inst.schedule, inst.discount);
    const auto fit = fit_shifted_lognormal(m);
    const double df = inst.discount.discount_factor(inst.schedule.maturity);
    for (double x : {inst.basket.strike(), u(rng) * inst.basket.strike(), fit.a - 1.0, fit.a}) {
      const double call = shifted_lognormal_call(fit, x, df);
      const double put = shifted_lognormal_put(fit, x, df);
      EXPECT_NEAR(call - put, df * (m.m1 - x), 1e-10 * std::max(1.0, m.m1));
    }
  }
}

TEST(AsianCall, NonnegativeAndMonotoneInVolShift) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 50; ++i) {
    const auto inst = eqlink::testing::random_instance(rng, 4, 8);
    double prev = 0.0;
    // Vols up to 1.0 here. Far beyond that the basket skew reaches ~100 and
    // the three-moment fit stops tracking the true price.
    for (double shift : {-90.0, -50.0, 0.0, 50.0, 100.0}) {
      const auto r =
          asian_call_price(inst.basket.with_vol_shift(shift), inst.corr, inst.schedule, inst.discount);
      EXPECT_GE(r.value, prev * (1 - 1e-12));
      prev = r.value;
    }
  }
}

TEST(AsianCall, DriftOverrideDecouplesDiscounting) {
  // With the drift pinned, the rate only enters through the discount factor.
  const auto b = single(100.0, 100.0, 0.25).with_drift_override(0.03);
  const ObservationSchedule s{{0.5, 1.0, 1.5}, 1.5};
  const auto lo = asian_call_price(b, CorrelationMatrix::identity(1), s, {0.0});
  const auto hi = asian_call_price(b, CorrelationMatrix::identity(1), s, {0.07});
  EXPECT_LT(rel_diff(hi.value, lo.value * std::exp(-0.07 * 1.5)), 1e-13);
}

TEST(AsianCall, DiscountFactorReported) {
  const auto inst = eqlink::testing::derived_benchmark();
  const auto r = asian_call_price(inst.basket, inst.corr, inst.schedule, inst.discount);
  EXPECT_EQ(r.discount_factor, std::exp(-0.02 * inst.schedule.maturity));
  EXPECT_EQ(to_string(r.branch), "strike>shift");
}

TEST(Levy, SingleLognormalIsBlackScholes) {
  const auto r = levy_call_price(single(100.0, 100.0, 0.2), CorrelationMatrix::identity(1), {{1.0}, 1.0},
                                 {0.05});
  EXPECT_LT(rel_diff(r.value, black_scholes_call(100.0, 100.0, 0.2, 0.05, 0.0, 1.0)), 1e-9);
  EXPECT_EQ(r.branch, PriceBranch::kLognormal);
}

TEST(Levy, MatchesModelForSingleLognormalGrid) {
  for (double vol : {0.1, 0.3, 0.5}) {
    for (double t : {0.5, 2.0, 5.0}) {
      const auto b = single(100.0, 90.0, vol, 0.01);
      const auto model = asian_call_price(b, CorrelationMatrix::identity(1), {{t}, t}, {0.03});
      const auto levy = levy_call_price(b, CorrelationMatrix::identity(1), {{t}, t}, {0.03});
      EXPECT_LT(rel_diff(levy.value, model.value), 1e-9);
    }
  }
}

TEST(Levy, ZeroVolIsIntrinsic) {
  const auto b = single(100.0, 100.0, 0.0);
  const ObservationSchedule s{{1.0, 2.0}, 2.0};
  const auto model = asian_call_price(b, CorrelationMatrix::identity(1), s, {0.04});
  const auto levy = levy_call_price(b, CorrelationMatrix::identity(1), s, {0.04});
  EXPECT_EQ(levy.branch, PriceBranch::kDegenerate);
  EXPECT_EQ(levy.value, model.value);
}

TEST(Levy, TerminalTargetUsesMaturityOnly) {
  const auto inst = eqlink::testing::derived_benchmark();
  const auto terminal = levy_call_price(inst.basket, inst.corr, inst.schedule, inst.discount, LevyTarget::kTerminal);
  const double t = inst.schedule.maturity;
  const auto direct = levy_call_price(inst.basket, inst.corr, {{t}, t}, inst.discount);
  EXPECT_EQ(terminal.value, direct.value);
}

TEST(SegFund, ShiftAbovePrincipalIsWorthless) {
  const ShiftedLognormalFit fit{120.0, 1.0, 0.3, false};
  PriceBranch branch;
  EXPECT_EQ(shifted_lognormal_put(fit, 100.0, 0.9, &branch), 0.0);
  EXPECT_EQ(branch, PriceBranch::kShiftAtOrAbovePrincipal);
  EXPECT_EQ(shifted_lognormal_put(fit, 120.0, 0.9), 0.0);
}

TEST(SegFund, ZeroVolZeroFeeShortfallIsExact) {
  std::vector<IndexSpec> idx{{"a", 100.0, 0.0, 0.05, {}}, {"b", 40.0, 0.0, 0.03, {}}};
  const SegFundSpec fund{100.0, {0.6, 0.4}, {}, {}, {}};
  const auto r = segfund_put_price(fund, idx, CorrelationMatrix::identity(2), {0.01}, 2.0);
  const double fwd = 60.0 * std::exp(-0.04 * 2.0) + 40.0 * std::exp(-0.02 * 2.0);
  EXPECT_NEAR(r.value, std::exp(-0.02) * (100.0 - fwd), 1e-12);
  EXPECT_EQ(r.branch, PriceBranch::kDegenerate);
}

TEST(SegFund, NondecreasingInEachFee) {
  std::vector<IndexSpec> idx{{"a", 2421.04, 0.2, 0.0, {}}, {"b", 391.64, 0.25, 0.0, {}}};
  const auto corr = CorrelationMatrix::uniform(2, 0.5);
  const std::vector<double> grid{0.0, 0.005, 0.01, 0.02, 0.04};
  for (std::size_t j = 0; j < 3; ++j) {
    for (bool mgmt : {true, false}) {
      double prev = 0.0;
      for (double fee : grid) {
        SegFundSpec fund{100.0, {0.5, 0.5}, {1.0, 2.0, 3.0}, {0.01, 0.01, 0.01}, {0.005, 0.005, 0.005}};
        (mgmt ? fund.mgmt_fees : fund.protection_fees)[j] = fee;
        const double v = segfund_put_price(fund, idx, corr, {0.02}, 4.0).value;
        EXPECT_GE(v, prev);
        prev = v;
      }
    }
  }
}

TEST(SegFund, ParityWithTerminalForward) {
  std::vector<IndexSpec> idx{{"a", 100.0, 0.2, 0.0, {}}, {"b", 50.0, 0.3, 0.01, {}}};
  const SegFundSpec fund{100.0, {0.7, 0.3}, {1.0, 2.0}, {0.02, 0.02}, {0.01, 0.01}};
  const auto corr = CorrelationMatrix::uniform(2, 0.3);
  const auto r = segfund_put_price(fund, idx, corr, {0.03}, 3.0);
  const auto& fit = std::get<ShiftedLognormalFit>(r.fit);
  const double call = shifted_lognormal_call(fit, 100.0, r.discount_factor);
  EXPECT_NEAR(call - r.value, r.discount_factor * (r.moments.m1 - 100.0), 1e-10 * 100.0);
  EXPECT_EQ(r.branch, PriceBranch::kShiftBelowPrincipal);
}

TEST(SecurityValue, ZeroVolFlatBasket) {
  const auto b = single(100.0, 100.0, 0.0);
  const auto r = security_value({100.0}, b, CorrelationMatrix::identity(1), {{1.0}, 1.0}, {0.0});
  EXPECT_EQ(r.value, 100.0);
  const auto r2 = security_value({100.0}, b.with_drift_override(0.0), CorrelationMatrix::identity(1),
                                 {{1.0, 3.0}, 3.0}, {0.04});
  EXPECT_NEAR(r2.value, 100.0 * std::exp(-0.12), 1e-12);
}

TEST(SecurityValue, ZeroGuaranteeIsTheOption) {
  const auto inst = eqlink::testing::derived_benchmark();
  const auto call = asian_call_price(inst.basket, inst.corr, inst.schedule, inst.discount);
  const auto sec = security_value({0.0}, inst.basket, inst.corr, inst.schedule, inst.discount);
  EXPECT_EQ(sec.value, call.value);
}

TEST(FlooredReturn, EqualRateAndYieldIsZero) {
  for (int m : {1, 2, 12}) {
    std::vector<double> t;
    for (int i = 0; i <= m; ++i) t.push_back(0.25 * i);
    EXPECT_EQ(floored_return_value(t, 0.03, 0.03, -1.0), 0.0);
    EXPECT_EQ(floored_return_value(t, 0.03, 0.03, -5.0), 0.0);
  }
}

TEST(FlooredReturn, ClosedFormExamples) {
  const std::vector<double> one{0.0, 1.0};
  EXPECT_NEAR(floored_return_value(one, 0.05, 0.0, -1.0), std::exp(-0.05) * (std::exp(0.05) - 1.0), 1e-15);
  const std::vector<double> two{0.0, 1.0, 2.0};
  EXPECT_NEAR(floored_return_value(two, 0.05, 0.0, -1.0), std::exp(-0.1) * 2.0 * (std::exp(0.05) - 1.0),
              1e-15);
}

TEST(FlooredReturn, BindingFloorUnsupported) {
  const std::vector<double> t{0.0, 1.0};
  try {
    floored_return_value(t, 0.05, 0.0, -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupported);
  }
  const std::vector<double> bad{0.0, 1.0, 1.0};
  EXPECT_THROW(floored_return_value(bad, 0.05, 0.0, -1.0), Error);
}
