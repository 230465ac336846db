#pragma once

#include <array>

#include "eqlink/moments.hpp"

namespace eqlink {

/// a + exp(b + c * eps), eps ~ N(0, 1), c > 0.
struct ShiftedLognormalFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  /// Set when the skewness was below kSkewFloor and the two-moment lognormal
  /// fit was used instead (a = 0).
  bool two_moment_fallback = false;
};

/// exp(a_l + b_l * eps), b_l > 0.
struct LognormalFit {
  double a_l = 0.0;
  double b_l = 0.0;
};

inline constexpr double kSkewFloor = 1e-6;

/// Raw moments (E X, E X^2, E X^3) of the shifted lognormal.
std::array<double, 3> shifted_lognormal_moments(const ShiftedLognormalFit& fit);
std::array<double, 3> shifted_lognormal_moments(double a, double b, double c);

/// Real root of x^3 + 3x - eta = 0, evaluated without cancellation.
double skew_cubic_root(double eta);

/// Closed-form three-moment fit. Throws Error(kDegenerate) when the variance
/// is degenerate and Error(kUnmatchableSkew) when skew <= 0.
ShiftedLognormalFit fit_shifted_lognormal(const MomentSet& moments);

/// Two-moment lognormal fit. Throws Error(kDegenerate) unless m2 > m1^2 > 0.
LognormalFit fit_lognormal(double m1, double m2);

}  // namespace eqlink
