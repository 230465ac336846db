#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eqlink/market_model.hpp"
#include "eqlink/montecarlo.hpp"

namespace eqlink {

enum class GreeksMethod { kAnalytic, kFiniteDifference };

/// Per-index hedge ratios. Vega is per absolute unit of annualized vol.
struct GreeksResult {
  double price = 0.0;
  std::vector<double> deltas;
  std::vector<double> vegas;
  GreeksMethod method = GreeksMethod::kAnalytic;
  /// Non-empty when the analytic path fell back to finite differences.
  std::string diagnostic;
};

/// Delta and vega of the shifted-lognormal Asian call by the chain rule
/// through moments, the moment-matching system and the pricing formula.
GreeksResult analytic_greeks(const BasketSpec& basket, const CorrelationMatrix& corr,
                             const ObservationSchedule& schedule, const DiscountSpec& discount);

enum class FdScheme {
  kForward,   // (f(x+h) - f(x)) / h
  kCentral,   // second order
  kCentral4,  // fourth order, stencil x +- h, x +- 2h
};

struct BumpSpec {
  double spot_rel = 1e-4;  // relative to the spot
  double vol_abs = 1e-4;
  FdScheme scheme = FdScheme::kCentral;
  /// Only this index when set; other entries are NaN.
  std::optional<std::size_t> index;
};

using BasketPricer = std::function<double(const BasketSpec&)>;

/// Finite-difference greeks of any basket pricer. Bumped spots keep the
/// basket ratios fixed. Throws Error(kInvalidInput) when a bump would make a
/// spot or volatility invalid.
GreeksResult fd_greeks(const BasketPricer& price, const BasketSpec& basket, const BumpSpec& bump);

enum class Greek { kDelta, kVega };

/// One-sided Monte Carlo finite difference of the Asian call. With common
/// random numbers the base and bumped payoffs share each path and the
/// estimate's standard error is that of the per-path difference quotient;
/// otherwise the bumped run uses an independent stream.
McEstimate mc_fd_greek(const AsianCallContract& contract, std::size_t index, Greek greek,
                       double bump, const McConfig& config, bool common_random_numbers = true);

}  // namespace eqlink
