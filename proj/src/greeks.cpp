#include "eqlink/greeks.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "eqlink/error.hpp"
#include "eqlink/moment_match.hpp"
#include "eqlink/moments.hpp"
#include "eqlink/normal.hpp"
#include "eqlink/pricer.hpp"

namespace eqlink {

namespace {

constexpr double kMinJacobianRcond = 1e-13;

// d(price)/d(a, b, c) of the shifted-lognormal call, discount factor included.
Eigen::Vector3d call_gradient(const ShiftedLognormalFit& fit, double strike, double df) {
  const double level = std::exp(fit.b + 0.5 * fit.c * fit.c);
  const double gap = strike - fit.a;
  if (gap > 1e-300) {
    const double d = (fit.b - std::log(gap)) / fit.c;
    const double nd = normal_cdf(d);
    const double ndc = normal_cdf(d + fit.c);
    return df * Eigen::Vector3d(nd, level * ndc, level * (fit.c * ndc + normal_pdf(d + fit.c)));
  }
  return df * Eigen::Vector3d(1.0, level, fit.c * level);
}

// Jacobian of the raw-moment map (a, b, c) -> (m1, m2, m3), with row k scaled by 1/s^(k-1).
Eigen::Matrix3d scaled_moment_jacobian(const ShiftedLognormalFit& fit, double s) {
  const double a = fit.a;
  const double c = fit.c;
  const double e1 = std::exp(fit.b + 0.5 * c * c);
  const double e2 = std::exp(2.0 * fit.b + 2.0 * c * c);
  const double e3 = std::exp(3.0 * fit.b + 4.5 * c * c);
  Eigen::Matrix3d j;
  j << 1.0, e1, c * e1,
       2.0 * a + 2.0 * e1, 2.0 * a * e1 + 2.0 * e2, 2.0 * a * c * e1 + 4.0 * c * e2,
       3.0 * a * a + 6.0 * a * e1 + 3.0 * e2, 3.0 * a * a * e1 + 6.0 * a * e2 + 3.0 * e3,
       3.0 * a * a * c * e1 + 12.0 * a * c * e2 + 9.0 * c * e3;
  j.row(1) /= s;
  j.row(2) /= s * s;
  return j;
}

GreeksResult fd_fallback(const BasketSpec& basket, const CorrelationMatrix& corr,
                         const ObservationSchedule& schedule, const DiscountSpec& discount,
                         std::string diagnostic) {
  const BasketPricer pricer = [&](const BasketSpec& b) {
    return asian_call_price(b, corr, schedule, discount).value;
  };
  GreeksResult g = fd_greeks(pricer, basket, BumpSpec{});
  g.diagnostic = std::move(diagnostic);
  return g;
}

}  // namespace

GreeksResult analytic_greeks(const BasketSpec& basket, const CorrelationMatrix& corr,
                             const ObservationSchedule& schedule, const DiscountSpec& discount) {
  const MomentSensitivities sens = asian_moment_sensitivities(basket, corr, schedule, discount);
  const MomentSet& ms = sens.moments;
  const std::size_t m = basket.size();
  const double df = discount.discount_factor(schedule.maturity);
  const double strike = basket.strike();

  GreeksResult g;
  g.method = GreeksMethod::kAnalytic;
  g.deltas.assign(m, 0.0);
  g.vegas.assign(m, 0.0);

  if (ms.degenerate) {
    const bool in_the_money = ms.m1 > strike;
    g.price = df * std::max(ms.m1 - strike, 0.0);
    for (std::size_t j = 0; j < m; ++j) g.deltas[j] = in_the_money ? df * sens.d_spot[j][0] : 0.0;
    return g;
  }

  const ShiftedLognormalFit fit = fit_shifted_lognormal(ms);
  if (fit.two_moment_fallback) {
    return fd_fallback(basket, corr, schedule, discount,
                       "skew below floor; two-moment fit differentiated numerically");
  }
  g.price = shifted_lognormal_call(fit, strike, df);

  // dP/dm = J^{-T} dP/d(a,b,c), solved on the moment-scaled system.
  const double s = ms.m1;
  const Eigen::Matrix3d jac = scaled_moment_jacobian(fit, s);
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(jac.transpose());
  if (!lu.isInvertible() || lu.rcond() < kMinJacobianRcond) {
    return fd_fallback(basket, corr, schedule, discount,
                       "moment Jacobian near singular; finite differences used");
  }
  const Eigen::Vector3d scaled = lu.solve(call_gradient(fit, strike, df));
  const Eigen::Vector3d dprice_dm(scaled(0), scaled(1) / s, scaled(2) / (s * s));

  for (std::size_t j = 0; j < m; ++j) {
    const auto& ds = sens.d_spot[j];
    const auto& dv = sens.d_vol[j];
    g.deltas[j] = dprice_dm(0) * ds[0] + dprice_dm(1) * ds[1] + dprice_dm(2) * ds[2];
    g.vegas[j] = dprice_dm(0) * dv[0] + dprice_dm(1) * dv[1] + dprice_dm(2) * dv[2];
  }
  return g;
}

GreeksResult fd_greeks(const BasketPricer& price, const BasketSpec& basket, const BumpSpec& bump) {
  if (!(bump.spot_rel > 0.0) || !(bump.vol_abs > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "bump sizes must be positive");
  }
  const std::size_t m = basket.size();
  if (bump.index && *bump.index >= m) throw Error(ErrorKind::kInvalidInput, "index out of range");

  GreeksResult g;
  g.method = GreeksMethod::kFiniteDifference;
  g.price = price(basket);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  g.deltas.assign(m, nan);
  g.vegas.assign(m, nan);

  // f(x + k h) for the stencil offsets k the scheme needs.
  auto derivative = [&](auto&& at, double h) {
    switch (bump.scheme) {
      case FdScheme::kForward:
        return (at(1.0) - g.price) / h;
      case FdScheme::kCentral:
        return (at(1.0) - at(-1.0)) / (2.0 * h);
      case FdScheme::kCentral4:
        return (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
    }
    return nan;
  };
  const double reach = bump.scheme == FdScheme::kCentral4 ? 2.0
                       : bump.scheme == FdScheme::kCentral ? 1.0
                                                           : 0.0;

  for (std::size_t j = 0; j < m; ++j) {
    if (bump.index && *bump.index != j) continue;
    const double spot = basket.indices()[j].spot;
    const double hs = bump.spot_rel * spot;
    if (!(spot - reach * hs > 0.0)) throw Error(ErrorKind::kInvalidInput, "spot bump makes spot nonpositive");
    g.deltas[j] = derivative([&](double k) { return price(basket.with_spot(j, spot + k * hs)); }, hs);

    const double vol = basket.indices()[j].vol;
    const double hv = bump.vol_abs;
    if (vol - reach * hv < 0.0) throw Error(ErrorKind::kInvalidInput, "vol bump makes vol negative");
    g.vegas[j] = derivative([&](double k) { return price(basket.with_vol(j, vol + k * hv)); }, hv);
  }
  return g;
}

McEstimate mc_fd_greek(const AsianCallContract& contract, std::size_t index, Greek greek,
                       double bump, const McConfig& config, bool common_random_numbers) {
  const BasketSpec& base = contract.basket;
  if (index >= base.size()) throw Error(ErrorKind::kInvalidInput, "index out of range");
  if (!(bump > 0.0)) throw Error(ErrorKind::kInvalidInput, "bump must be positive");
  double h = 0.0;
  BasketSpec bumped = base;
  if (greek == Greek::kDelta) {
    h = bump * base.indices()[index].spot;
    bumped = base.with_spot(index, base.indices()[index].spot + h);
  } else {
    h = bump;
    bumped = base.with_vol(index, base.indices()[index].vol + h);
  }
  AsianCallContract up = contract;
  up.basket = bumped;

  if (!common_random_numbers) {
    McConfig other = config;
    other.seed = config.seed ^ 0x9E3779B97F4A7C15ull;
    const McEstimate lo = mc_price(contract, config);
    const McEstimate hi = mc_price(up, other);
    return {(hi.mean - lo.mean) / h, std::hypot(hi.std_error, lo.std_error) / h, lo.n_paths};
  }

  const GbmPathSampler s0 =
      simulate_basket_paths(base, contract.corr, contract.schedule, contract.discount);
  const GbmPathSampler s1 =
      simulate_basket_paths(bumped, contract.corr, contract.schedule, contract.discount);
  const std::size_t m = s0.num_indices();
  const std::size_t n = s0.num_times();
  const auto& alphas = base.alphas();
  const double strike = base.strike();
  const double df = contract.discount.discount_factor(contract.schedule.maturity);
  auto payoff = [&](const std::vector<double>& lv) {
    double avg = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < m; ++j) avg += alphas[j] * lv[k * m + j];
    }
    return df * std::max(avg / static_cast<double>(n) - strike, 0.0);
  };
  const PathKernel kernel = [&](std::span<const double> z, std::span<double> out) {
    thread_local std::vector<double> lv0, lv1;
    lv0.resize(m * n);
    lv1.resize(m * n);
    s0.levels(z, lv0);
    s1.levels(z, lv1);
    out[0] = (payoff(lv1) - payoff(lv0)) / h;
  };
  return run_paths(config, s0.normals_per_path(), 1, kernel)[0];
}

}  // namespace eqlink
