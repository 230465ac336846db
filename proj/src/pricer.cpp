#include "eqlink/pricer.hpp"

#include <algorithm>
#include <cmath>

#include "eqlink/error.hpp"
#include "eqlink/normal.hpp"

namespace eqlink {

namespace {

// Below this gap log(X - a) is not representable; the X <= a branch is
// continuous there and exact to working precision.
constexpr double kMinLogGap = 1e-300;

}  // namespace

std::string_view to_string(PriceBranch branch) {
  switch (branch) {
    case PriceBranch::kStrikeAboveShift: return "strike>shift";
    case PriceBranch::kStrikeAtOrBelowShift: return "strike<=shift";
    case PriceBranch::kShiftBelowPrincipal: return "shift<principal";
    case PriceBranch::kShiftAtOrAbovePrincipal: return "shift>=principal";
    case PriceBranch::kLognormal: return "lognormal";
    case PriceBranch::kDegenerate: return "degenerate";
  }
  return "unknown";
}

double shifted_lognormal_call(const ShiftedLognormalFit& fit, double strike,
                              double discount_factor, PriceBranch* branch) {
  const double level = std::exp(fit.b + 0.5 * fit.c * fit.c);
  const double gap = strike - fit.a;
  if (gap > kMinLogGap) {
    if (branch) *branch = PriceBranch::kStrikeAboveShift;
    const double d = (fit.b - std::log(gap)) / fit.c;
    return discount_factor * (-gap * normal_cdf(d) + level * normal_cdf(d + fit.c));
  }
  if (branch) *branch = PriceBranch::kStrikeAtOrBelowShift;
  return discount_factor * (level - gap);
}

double shifted_lognormal_put(const ShiftedLognormalFit& fit, double strike,
                             double discount_factor, PriceBranch* branch) {
  const double gap = strike - fit.a;
  if (gap > kMinLogGap) {
    if (branch) *branch = PriceBranch::kShiftBelowPrincipal;
    const double level = std::exp(fit.b + 0.5 * fit.c * fit.c);
    const double d = (std::log(gap) - fit.b) / fit.c;
    return discount_factor * (gap * normal_cdf(d) - level * normal_cdf(d - fit.c));
  }
  if (branch) *branch = PriceBranch::kShiftAtOrAbovePrincipal;
  return 0.0;
}

double lognormal_call(const LognormalFit& fit, double strike, double discount_factor) {
  const double forward = std::exp(fit.a_l + 0.5 * fit.b_l * fit.b_l);
  const double d1 = (fit.a_l + fit.b_l * fit.b_l - std::log(strike)) / fit.b_l;
  const double d2 = d1 - fit.b_l;
  return discount_factor * (forward * normal_cdf(d1) - strike * normal_cdf(d2));
}

PriceResult asian_call_price(const BasketSpec& basket, const CorrelationMatrix& corr,
                             const ObservationSchedule& schedule, const DiscountSpec& discount) {
  PriceResult res;
  res.moments = asian_moments(basket, corr, schedule, discount);
  res.discount_factor = discount.discount_factor(schedule.maturity);
  const double strike = basket.strike();
  if (res.moments.degenerate) {
    res.branch = PriceBranch::kDegenerate;
    res.value = res.discount_factor * std::max(res.moments.m1 - strike, 0.0);
    return res;
  }
  const ShiftedLognormalFit fit = fit_shifted_lognormal(res.moments);
  res.fit = fit;
  res.value = shifted_lognormal_call(fit, strike, res.discount_factor, &res.branch);
  return res;
}

PriceResult levy_call_price(const BasketSpec& basket, const CorrelationMatrix& corr,
                            const ObservationSchedule& schedule, const DiscountSpec& discount,
                            LevyTarget target) {
  PriceResult res;
  if (target == LevyTarget::kAverage) {
    res.moments = asian_moments(basket, corr, schedule, discount);
  } else {
    require_valid(validate_market(basket, corr, schedule, discount));
    res.moments = terminal_moments(basket.alphas(), basket.indices(), corr, schedule.maturity,
                                   discount);
  }
  res.discount_factor = discount.discount_factor(schedule.maturity);
  const double strike = basket.strike();
  if (res.moments.degenerate) {
    res.branch = PriceBranch::kDegenerate;
    res.value = res.discount_factor * std::max(res.moments.m1 - strike, 0.0);
    return res;
  }
  const LognormalFit fit = fit_lognormal(res.moments.m1, res.moments.m2);
  res.fit = fit;
  res.branch = PriceBranch::kLognormal;
  res.value = lognormal_call(fit, strike, res.discount_factor);
  return res;
}

PriceResult segfund_put_price(const SegFundSpec& fund, std::span<const IndexSpec> indices,
                              const CorrelationMatrix& corr, const DiscountSpec& discount,
                              double maturity) {
  require_valid(validate_segfund(fund, indices, corr, maturity));
  const auto weights = segfund_terminal_weights(fund, indices);
  PriceResult res;
  res.moments = terminal_moments(weights, indices, corr, maturity, discount);
  res.discount_factor = discount.discount_factor(maturity);
  if (res.moments.degenerate) {
    res.branch = PriceBranch::kDegenerate;
    res.value = res.discount_factor * std::max(fund.principal - res.moments.m1, 0.0);
    return res;
  }
  const ShiftedLognormalFit fit = fit_shifted_lognormal(res.moments);
  res.fit = fit;
  res.value = shifted_lognormal_put(fit, fund.principal, res.discount_factor, &res.branch);
  return res;
}

PriceResult security_value(const GuaranteeSpec& guarantee, const BasketSpec& basket,
                           const CorrelationMatrix& corr, const ObservationSchedule& schedule,
                           const DiscountSpec& discount) {
  if (!std::isfinite(guarantee.guaranteed_amount) || guarantee.guaranteed_amount < 0.0) {
    throw Error(ErrorKind::kInvalidInput, "guaranteed amount must be nonnegative");
  }
  PriceResult res = asian_call_price(basket, corr, schedule, discount);
  res.value += res.discount_factor * guarantee.guaranteed_amount;
  return res;
}

double floored_return_value(std::span<const double> times, double rate, double div_yield,
                            double floor) {
  if (!(floor <= -1.0)) {
    throw Error(ErrorKind::kUnsupported, "closed form requires a non-binding floor F <= -1");
  }
  if (times.size() < 2) throw Error(ErrorKind::kInvalidInput, "need t_0 and at least one return");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error(ErrorKind::kInvalidInput, "times not increasing");
  }
  const double carry = rate - div_yield;
  double sum = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    sum += std::expm1(carry * (times[i] - times[i - 1]));
  }
  return std::exp(-rate * times.back()) * sum;
}

}  // namespace eqlink
