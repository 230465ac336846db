#pragma once

#include <array>
#include <span>
#include <vector>

#include "eqlink/market_model.hpp"

namespace eqlink {

/// Variance below this fraction of m1^2 is treated as a point mass.
inline constexpr double kDegenerateVarianceTol = 1e-14;

struct MomentSet {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double skew = 0.0;  // NaN when degenerate
  bool degenerate = false;
};

/// Central moments and skewness from raw moments. Throws Error(kInvalidInput)
/// when the implied variance is negative beyond rounding.
MomentSet central_from_raw(double m1, double m2, double m3);

/// Raw and central moments of the arithmetic average
///   Y = (1/N) sum_k sum_i alpha_i I_{t_k}^i
/// under correlated GBM. Central moments are evaluated from centered kernels
/// rather than by differencing raw moments, so they stay accurate for small vols.
MomentSet asian_moments(const BasketSpec& basket, const CorrelationMatrix& corr,
                        const ObservationSchedule& schedule, const DiscountSpec& discount);

/// Moments of sum_i units_i I_T^i. Same kernels as asian_moments with a
/// single observation at T; agrees bit-for-bit with asian_moments on
/// schedule {T} when units are the basket alphas.
MomentSet terminal_moments(std::span<const double> units, std::span<const IndexSpec> indices,
                           const CorrelationMatrix& corr, double maturity,
                           const DiscountSpec& discount);

/// Partial derivatives of (m1, m2, m3) with respect to each spot (alphas held
/// fixed) and each volatility.
struct MomentSensitivities {
  MomentSet moments;
  std::vector<std::array<double, 3>> d_spot;
  std::vector<std::array<double, 3>> d_vol;
};

MomentSensitivities asian_moment_sensitivities(const BasketSpec& basket,
                                               const CorrelationMatrix& corr,
                                               const ObservationSchedule& schedule,
                                               const DiscountSpec& discount);

}  // namespace eqlink
