#include "eqlink/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eqlink/error.hpp"
#include "eqlink/summation.hpp"

namespace eqlink {

namespace {

// A lognormal atom E_p * exp(G_p - var_p / 2): one index observed at one time,
// already scaled by its basket amplitude and the 1/N averaging factor.
struct Atoms {
  std::vector<std::size_t> index;
  std::vector<double> time;
  std::vector<double> mean;
  // Row-major P x P: expm1(C_pq) and exp(C_pq) of the log-covariance C_pq.
  std::vector<double> cov_m1;
  std::vector<double> cov_exp;

  std::size_t size() const { return index.size(); }
};

Atoms make_atoms(std::span<const double> amplitudes, std::span<const double> drifts,
                 std::span<const double> vols, const CorrelationMatrix& corr,
                 std::span<const double> times) {
  const std::size_t m = amplitudes.size();
  const std::size_t n = times.size();
  const double scale = 1.0 / static_cast<double>(n);
  Atoms a;
  // Lexicographic: index-major, then observation time.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      a.index.push_back(i);
      a.time.push_back(times[k]);
      a.mean.push_back(amplitudes[i] * std::exp(drifts[i] * times[k]) * scale);
    }
  }
  const std::size_t p = a.size();
  a.cov_m1.resize(p * p);
  a.cov_exp.resize(p * p);
  for (std::size_t x = 0; x < p; ++x) {
    for (std::size_t y = 0; y < p; ++y) {
      const std::size_t i = a.index[x];
      const std::size_t j = a.index[y];
      const double c = vols[i] * vols[j] * corr(i, j) * std::min(a.time[x], a.time[y]);
      a.cov_m1[x * p + y] = std::expm1(c);
      a.cov_exp[x * p + y] = std::exp(c);
    }
  }
  return a;
}

MomentSet moments_of(const Atoms& a) {
  const std::size_t p = a.size();
  CompensatedSum s1, s2, s3, c2, c3;
  for (std::size_t x = 0; x < p; ++x) {
    s1.add(a.mean[x]);
    for (std::size_t y = 0; y < p; ++y) {
      const double exy = a.mean[x] * a.mean[y];
      s2.add(exy * a.cov_exp[x * p + y]);
      c2.add(exy * a.cov_m1[x * p + y]);
      for (std::size_t z = 0; z < p; ++z) {
        const double exyz = exy * a.mean[z];
        const double gxy = a.cov_exp[x * p + y];
        const double gxz = a.cov_exp[x * p + z];
        const double gyz = a.cov_exp[y * p + z];
        s3.add(exyz * gxy * gxz * gyz);
        // E[(X-EX)(Y-EY)(Z-EZ)] / (EX EY EZ) = AB + AC + BC + ABC with A = expm1(C_xy), ...
        const double ab = a.cov_m1[x * p + y];
        const double ac = a.cov_m1[x * p + z];
        const double bc = a.cov_m1[y * p + z];
        c3.add(exyz * (ab * ac + ab * bc + ac * bc + ab * ac * bc));
      }
    }
  }
  MomentSet ms;
  ms.m1 = s1.value();
  ms.m2 = s2.value();
  ms.m3 = s3.value();
  ms.mu2 = std::max(c2.value(), 0.0);
  ms.mu3 = c3.value();
  ms.degenerate = ms.mu2 <= kDegenerateVarianceTol * ms.m1 * ms.m1;
  ms.skew = ms.degenerate ? std::numeric_limits<double>::quiet_NaN()
                          : ms.mu3 / std::pow(ms.mu2, 1.5);
  return ms;
}

}  // namespace

MomentSet central_from_raw(double m1, double m2, double m3) {
  if (!std::isfinite(m1) || !std::isfinite(m2) || !std::isfinite(m3)) {
    throw Error(ErrorKind::kInvalidInput, "moments must be finite");
  }
  MomentSet ms{m1, m2, m3, 0.0, 0.0, 0.0, false};
  double mu2 = m2 - m1 * m1;
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * std::max(m2, m1 * m1);
  if (mu2 < -rounding) {
    throw Error(ErrorKind::kInvalidInput, "negative variance: m2 < m1^2");
  }
  mu2 = std::max(mu2, 0.0);
  ms.mu2 = mu2;
  ms.mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  ms.degenerate = mu2 <= kDegenerateVarianceTol * m1 * m1;
  ms.skew = ms.degenerate ? std::numeric_limits<double>::quiet_NaN() : ms.mu3 / std::pow(mu2, 1.5);
  return ms;
}

MomentSet asian_moments(const BasketSpec& basket, const CorrelationMatrix& corr,
                        const ObservationSchedule& schedule, const DiscountSpec& discount) {
  require_valid(validate_market(basket, corr, schedule, discount));
  const auto amps = basket.amplitudes();
  const auto drifts = basket.drifts(discount.rate);
  const auto vols = basket.vols();
  return moments_of(make_atoms(amps, drifts, vols, corr, schedule.times));
}

MomentSet terminal_moments(std::span<const double> units, std::span<const IndexSpec> indices,
                           const CorrelationMatrix& corr, double maturity,
                           const DiscountSpec& discount) {
  if (units.size() != indices.size()) {
    throw Error(ErrorKind::kInvalidInput, "units do not match indices");
  }
  ValidationReport r = validate_indices(indices);
  if (corr.size() != indices.size()) {
    r.add("correlation size does not match indices");
  } else {
    for (auto& v : validate_correlation(corr).violations) r.add(std::move(v));
  }
  if (!std::isfinite(maturity) || !(maturity > 0.0)) r.add("maturity must be positive");
  require_valid(r);

  const std::size_t m = indices.size();
  std::vector<double> amps(m), drifts(m), vols(m);
  for (std::size_t i = 0; i < m; ++i) {
    amps[i] = units[i] * indices[i].spot;
    drifts[i] = indices[i].effective_drift(discount.rate);
    vols[i] = indices[i].vol;
  }
  const double times[] = {maturity};
  return moments_of(make_atoms(amps, drifts, vols, corr, times));
}

MomentSensitivities asian_moment_sensitivities(const BasketSpec& basket,
                                               const CorrelationMatrix& corr,
                                               const ObservationSchedule& schedule,
                                               const DiscountSpec& discount) {
  require_valid(validate_market(basket, corr, schedule, discount));
  const auto amps = basket.amplitudes();
  const auto drifts = basket.drifts(discount.rate);
  const auto vols = basket.vols();
  const Atoms a = make_atoms(amps, drifts, vols, corr, schedule.times);
  const std::size_t m = basket.size();
  const std::size_t p = a.size();

  MomentSensitivities out;
  out.moments = moments_of(a);
  out.d_spot.assign(m, {0.0, 0.0, 0.0});
  out.d_vol.assign(m, {0.0, 0.0, 0.0});

  // dC_xy/dsigma_j is rho * min(t_x, t_y) * (sigma_{i(y)} [i(x)=j] + sigma_{i(x)} [i(y)=j]);
  // store the two one-sided pieces per pair.
  std::vector<double> dcov_first(p * p), dcov_second(p * p);
  for (std::size_t x = 0; x < p; ++x) {
    for (std::size_t y = 0; y < p; ++y) {
      const std::size_t i = a.index[x];
      const std::size_t j = a.index[y];
      const double base = corr(i, j) * std::min(a.time[x], a.time[y]);
      dcov_first[x * p + y] = base * vols[j];   // w.r.t. sigma_{i(x)}
      dcov_second[x * p + y] = base * vols[i];  // w.r.t. sigma_{i(y)}
    }
  }

  // Spot derivatives are accumulated as counts * term and divided by the spot at the end.
  std::vector<std::array<CompensatedSum, 3>> ds(m), dv(m);
  for (std::size_t x = 0; x < p; ++x) {
    const std::size_t ix = a.index[x];
    ds[ix][0].add(a.mean[x]);
    for (std::size_t y = 0; y < p; ++y) {
      const std::size_t iy = a.index[y];
      const double t2 = a.mean[x] * a.mean[y] * a.cov_exp[x * p + y];
      ds[ix][1].add(t2);
      ds[iy][1].add(t2);
      dv[ix][1].add(t2 * dcov_first[x * p + y]);
      dv[iy][1].add(t2 * dcov_second[x * p + y]);
      for (std::size_t z = 0; z < p; ++z) {
        const std::size_t iz = a.index[z];
        const double t3 = a.mean[x] * a.mean[y] * a.mean[z] * a.cov_exp[x * p + y] *
                          a.cov_exp[x * p + z] * a.cov_exp[y * p + z];
        ds[ix][2].add(t3);
        ds[iy][2].add(t3);
        ds[iz][2].add(t3);
        dv[ix][2].add(t3 * dcov_first[x * p + y]);
        dv[iy][2].add(t3 * dcov_second[x * p + y]);
        dv[ix][2].add(t3 * dcov_first[x * p + z]);
        dv[iz][2].add(t3 * dcov_second[x * p + z]);
        dv[iy][2].add(t3 * dcov_first[y * p + z]);
        dv[iz][2].add(t3 * dcov_second[y * p + z]);
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double spot = basket.indices()[j].spot;
    for (int k = 0; k < 3; ++k) {
      out.d_spot[j][k] = ds[j][k].value() / spot;
      out.d_vol[j][k] = dv[j][k].value();
    }
  }
  return out;
}

}  // namespace eqlink
