#pragma once

namespace eqlink {

double normal_pdf(double x);
/// Standard normal cdf via erfc; accurate in both tails.
double normal_cdf(double x);
/// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);

}  // namespace eqlink
