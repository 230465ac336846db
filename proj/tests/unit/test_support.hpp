// Shared oracles and generators for the unit and acceptance suites. Nothing
// here calls into the pricing library's formulas.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "eqlink/market_model.hpp"

namespace eqlink::testing {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Textbook Black-Scholes call with continuous yield.
inline double black_scholes_call(double spot, double strike, double vol, double rate, double yield,
                                 double t) {
  const double sd = vol * std::sqrt(t);
  const double d1 = (std::log(spot / strike) + (rate - yield + 0.5 * vol * vol) * t) / sd;
  const double d2 = d1 - sd;
  return spot * std::exp(-yield * t) * std_normal_cdf(d1) - strike * std::exp(-rate * t) * std_normal_cdf(d2);
}

/// Composite Simpson integral of f(eps) * phi(eps) over [-lim, lim].
inline double gaussian_expectation(const std::function<double(double)>& f, double lim = 12.0,
                                   int intervals = 20000) {
  const double h = 2.0 * lim / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = -lim + i * h;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f(x) * std::exp(-0.5 * x * x);
  }
  return sum * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

struct RandomInstance {
  BasketSpec basket;
  CorrelationMatrix corr;
  ObservationSchedule schedule;
  DiscountSpec discount;
};

/// Random valid market: uniform pairwise correlation (PSD for rho >= 0),
/// positive weights, increasing observation times.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_indices = 3,
                                      std::size_t max_times = 6, double min_vol = 0.05,
                                      double max_vol = 0.5) {
  std::uniform_int_distribution<std::size_t> m_dist(1, max_indices);
  std::uniform_int_distribution<std::size_t> n_dist(1, max_times);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t m = m_dist(rng);
  const std::size_t n = n_dist(rng);
  std::vector<IndexSpec> idx;
  std::vector<double> w;
  for (std::size_t j = 0; j < m; ++j) {
    IndexSpec s;
    s.name = "i" + std::to_string(j);
    s.spot = 50.0 + 2000.0 * u(rng);
    s.vol = min_vol + (max_vol - min_vol) * u(rng);
    s.div_yield = 0.03 * u(rng);
    idx.push_back(s);
    w.push_back(1.0 + 30.0 * u(rng));
  }
  ObservationSchedule sched;
  double t = 0.05 + 0.5 * u(rng);
  for (std::size_t k = 0; k < n; ++k) {
    sched.times.push_back(t);
    t += 0.05 + 0.5 * u(rng);
  }
  sched.maturity = sched.times.back() + 0.1 * u(rng);
  return RandomInstance{build_basket(idx, w), CorrelationMatrix::uniform(m, 0.9 * u(rng)), sched,
                        DiscountSpec{0.06 * u(rng)}};
}

/// The derived benchmark: reference five-index basket with frozen vols,
/// pairwise correlation 0.5, r = 0.02, q = 0.
inline RandomInstance derived_benchmark() {
  const double spots[] = {2421.04, 391.64, 1147.27, 15944.36, 2913.59};
  const double vols[] = {0.20, 0.25, 0.15, 0.30, 0.22};
  std::vector<IndexSpec> idx;
  for (int j = 0; j < 5; ++j) idx.push_back({"Index " + std::to_string(j + 1), spots[j], vols[j], 0.0, {}});
  const std::vector<std::string> dates{"2022-08-31", "2022-09-30", "2022-10-31", "2022-11-30",
                                       "2022-12-31", "2023-01-31", "2023-02-28", "2023-03-31",
                                       "2023-04-30", "2023-05-31", "2023-06-30", "2023-07-22"};
  return RandomInstance{build_basket(idx, {25.0, 30.0, 10.0, 2.5, 2.5}), CorrelationMatrix::uniform(5, 0.5),
                        build_schedule_from_dates("2019-06-02", dates, "2023-07-23"), DiscountSpec{0.02}};
}

inline double rel_diff(double x, double y) {
  return std::abs(x - y) / std::max(std::abs(y), 1e-300);
}

}  // namespace eqlink::testing
