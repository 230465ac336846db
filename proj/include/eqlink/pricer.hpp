#pragma once

#include <span>
#include <string_view>
#include <variant>

#include "eqlink/market_model.hpp"
#include "eqlink/moment_match.hpp"
#include "eqlink/moments.hpp"

namespace eqlink {

enum class PriceBranch {
  kStrikeAboveShift,         // call, X > a
  kStrikeAtOrBelowShift,     // call, X <= a
  kShiftBelowPrincipal,      // put, a < P
  kShiftAtOrAbovePrincipal,  // put, a >= P
  kLognormal,                // two-moment Levy formula
  kDegenerate,               // zero variance, intrinsic value
};

std::string_view to_string(PriceBranch branch);

using FitVariant = std::variant<std::monostate, ShiftedLognormalFit, LognormalFit>;

struct PriceResult {
  double value = 0.0;
  double discount_factor = 1.0;
  PriceBranch branch = PriceBranch::kDegenerate;
  FitVariant fit;
  MomentSet moments;
};

/// e^{-rT} E max(a + e^{b + c eps} - strike, 0).
double shifted_lognormal_call(const ShiftedLognormalFit& fit, double strike,
                              double discount_factor, PriceBranch* branch = nullptr);
/// e^{-rT} E max(strike - a - e^{b + c eps}, 0).
double shifted_lognormal_put(const ShiftedLognormalFit& fit, double strike,
                             double discount_factor, PriceBranch* branch = nullptr);
/// e^{-rT} E max(e^{a_l + b_l eps} - strike, 0).
double lognormal_call(const LognormalFit& fit, double strike, double discount_factor);

/// Arithmetic-average basket call priced by the three-moment shifted-lognormal fit.
PriceResult asian_call_price(const BasketSpec& basket, const CorrelationMatrix& corr,
                             const ObservationSchedule& schedule, const DiscountSpec& discount);

/// Which random variable the Levy baseline matches: the average Y (default),
/// or the basket level at maturity.
enum class LevyTarget { kAverage, kTerminal };

PriceResult levy_call_price(const BasketSpec& basket, const CorrelationMatrix& corr,
                            const ObservationSchedule& schedule, const DiscountSpec& discount,
                            LevyTarget target = LevyTarget::kAverage);

/// Maturity guarantee max(P - sum_i w_i I_T^i, 0) of a segregated fund.
PriceResult segfund_put_price(const SegFundSpec& fund, std::span<const IndexSpec> indices,
                              const CorrelationMatrix& corr, const DiscountSpec& discount,
                              double maturity);

/// Guaranteed amount discounted to today plus the embedded Asian call.
PriceResult security_value(const GuaranteeSpec& guarantee, const BasketSpec& basket,
                           const CorrelationMatrix& corr, const ObservationSchedule& schedule,
                           const DiscountSpec& discount);

/// Value of sum_i max(I_i / I_{i-1} - 1, F) over times t_0 < ... < t_M, for a
/// non-binding floor F <= -1. Throws Error(kUnsupported) for F > -1.
double floored_return_value(std::span<const double> times, double rate, double div_yield,
                            double floor);

}  // namespace eqlink
