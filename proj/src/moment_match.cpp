#include "eqlink/moment_match.hpp"

#include <cmath>

#include "eqlink/error.hpp"

namespace eqlink {

std::array<double, 3> shifted_lognormal_moments(double a, double b, double c) {
  const double l1 = std::exp(b + 0.5 * c * c);
  const double l2 = std::exp(2.0 * b + 2.0 * c * c);
  const double l3 = std::exp(3.0 * b + 4.5 * c * c);
  return {a + l1, a * a + 2.0 * a * l1 + l2, a * a * a + 3.0 * a * a * l1 + 3.0 * a * l2 + l3};
}

std::array<double, 3> shifted_lognormal_moments(const ShiftedLognormalFit& fit) {
  return shifted_lognormal_moments(fit.a, fit.b, fit.c);
}

double skew_cubic_root(double eta) {
  // Cardano: x = u - 1/u with u^3 = eta/2 + sqrt(eta^2/4 + 1). The second
  // cube root equals -1/u since the two radicands multiply to -1.
  const double half = 0.5 * eta;
  const double u = std::cbrt(half + std::hypot(half, 1.0));
  double x = u - 1.0 / u;
  // One Newton step restores full relative precision when eta is small and
  // u - 1/u cancels.
  x -= (x * x * x + 3.0 * x - eta) / (3.0 * x * x + 3.0);
  return x;
}

ShiftedLognormalFit fit_shifted_lognormal(const MomentSet& moments) {
  const double m1 = moments.m1;
  const double mu2 = moments.mu2;
  const double mu3 = moments.mu3;
  if (!std::isfinite(m1) || !std::isfinite(mu2) || !std::isfinite(mu3)) {
    throw Error(ErrorKind::kInvalidInput, "moments must be finite");
  }
  if (moments.degenerate || !(mu2 > kDegenerateVarianceTol * m1 * m1)) {
    throw Error(ErrorKind::kDegenerate, "degenerate distribution");
  }
  const double eta = mu3 / std::pow(mu2, 1.5);
  if (!(eta > 0.0)) throw Error(ErrorKind::kUnmatchableSkew, "unmatchable skew");

  ShiftedLognormalFit fit;
  if (eta < kSkewFloor) {
    if (!(m1 > 0.0)) throw Error(ErrorKind::kUnmatchableSkew, "unmatchable skew");
    const double var_log = std::log1p(mu2 / (m1 * m1));
    fit.a = 0.0;
    fit.b = std::log(m1) - 0.5 * var_log;
    fit.c = std::sqrt(var_log);
    fit.two_moment_fallback = true;
    return fit;
  }
  const double x = skew_cubic_root(eta);
  const double c2 = std::log1p(x * x);  // ln w, w = 1 + x^2
  const double scale = std::sqrt(mu2) / x;  // mean of the lognormal part
  fit.c = std::sqrt(c2);
  fit.b = std::log(scale) - 0.5 * c2;
  fit.a = m1 - scale;
  return fit;
}

LognormalFit fit_lognormal(double m1, double m2) {
  if (!std::isfinite(m1) || !std::isfinite(m2) || !(m1 > 0.0) || !(m2 > m1 * m1)) {
    throw Error(ErrorKind::kDegenerate, "lognormal fit needs m2 > m1^2 > 0");
  }
  LognormalFit fit;
  const double var_log = std::log(m2 / (m1 * m1));
  fit.b_l = std::sqrt(var_log);
  fit.a_l = std::log(m1) - 0.5 * var_log;
  return fit;
}

}  // namespace eqlink
