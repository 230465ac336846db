#include "eqlink/market_model.hpp"

#include <chrono>
#include <cmath>
#include <charconv>
#include <numeric>

#include "eqlink/error.hpp"

namespace eqlink {

namespace {

std::string fmt_index(std::size_t j) { return "index " + std::to_string(j + 1); }

}  // namespace

CorrelationMatrix::CorrelationMatrix(const std::vector<std::vector<double>>& rows)
    : m_(rows.size()) {
  entries_.reserve(m_ * m_);
  for (const auto& row : rows) {
    if (row.size() != m_) {
      throw Error(ErrorKind::kInvalidInput, "correlation matrix is not square");
    }
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t m) { return uniform(m, 0.0); }

CorrelationMatrix CorrelationMatrix::uniform(std::size_t m, double rho) {
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, rho));
  for (std::size_t i = 0; i < m; ++i) rows[i][i] = 1.0;
  return CorrelationMatrix(rows);
}

std::optional<std::vector<double>> semidefinite_cholesky(const CorrelationMatrix& corr,
                                                         double tol) {
  const std::size_t m = corr.size();
  std::vector<double> l(m * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double d = corr(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l[j * m + k] * l[j * m + k];
    if (!std::isfinite(d) || d < -tol) return std::nullopt;
    if (d <= tol) {
      // Zero pivot: the column below must vanish too, otherwise not PSD.
      for (std::size_t i = j + 1; i < m; ++i) {
        double s = corr(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
        if (std::abs(s) > std::sqrt(tol)) return std::nullopt;
      }
      continue;
    }
    const double pivot = std::sqrt(d);
    l[j * m + j] = pivot;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = corr(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
      l[i * m + j] = s / pivot;
    }
  }
  return l;
}

BasketSpec build_basket(std::vector<IndexSpec> indices, std::vector<double> weights) {
  if (indices.size() != weights.size()) {
    throw Error(ErrorKind::kInvalidInput, "basket has " + std::to_string(indices.size()) +
                                              " indices but " + std::to_string(weights.size()) +
                                              " weights");
  }
  if (indices.empty()) throw Error(ErrorKind::kInvalidInput, "basket has no indices");
  BasketSpec b;
  b.alphas_.reserve(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (!(indices[j].spot > 0.0) || !std::isfinite(indices[j].spot)) {
      throw Error(ErrorKind::kInvalidInput, fmt_index(j) + ": spot must be positive");
    }
    if (!(weights[j] > 0.0) || !std::isfinite(weights[j])) {
      throw Error(ErrorKind::kInvalidInput, fmt_index(j) + ": weight must be positive");
    }
    b.alphas_.push_back(weights[j] / indices[j].spot);
  }
  b.strike_ = std::accumulate(weights.begin(), weights.end(), 0.0);
  b.indices_ = std::move(indices);
  b.weights_ = std::move(weights);
  return b;
}

std::vector<double> BasketSpec::amplitudes() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = alphas_[j] * indices_[j].spot;
  return out;
}

std::vector<double> BasketSpec::drifts(double rate) const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = indices_[j].effective_drift(rate);
  return out;
}

std::vector<double> BasketSpec::vols() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = indices_[j].vol;
  return out;
}

BasketSpec BasketSpec::with_spot(std::size_t j, double spot) const {
  BasketSpec b = *this;
  b.indices_.at(j).spot = spot;
  return b;
}

BasketSpec BasketSpec::with_vol(std::size_t j, double vol) const {
  BasketSpec b = *this;
  b.indices_.at(j).vol = vol;
  return b;
}

BasketSpec BasketSpec::with_vol_shift(double shift_percent) const {
  BasketSpec b = *this;
  for (auto& idx : b.indices_) idx.vol *= 1.0 + shift_percent / 100.0;
  return b;
}

BasketSpec BasketSpec::with_drift_override(double drift) const {
  BasketSpec b = *this;
  for (auto& idx : b.indices_) idx.drift_override = drift;
  return b;
}

double DiscountSpec::discount_factor(double t) const { return std::exp(-rate * t); }

std::vector<double> segfund_units(const SegFundSpec& fund, std::span<const IndexSpec> indices) {
  if (fund.allocations.size() != indices.size()) {
    throw Error(ErrorKind::kInvalidInput, "segregated fund allocations do not match indices");
  }
  std::vector<double> units(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    units[i] = fund.allocations[i] * fund.principal / indices[i].spot;
  }
  return units;
}

std::vector<double> segfund_terminal_weights(const SegFundSpec& fund,
                                             std::span<const IndexSpec> indices) {
  if (fund.mgmt_fees.size() != fund.fee_times.size() ||
      fund.protection_fees.size() != fund.fee_times.size()) {
    throw Error(ErrorKind::kInvalidInput, "fee schedule lengths differ");
  }
  double retained = 1.0;
  for (std::size_t j = 0; j < fund.fee_times.size(); ++j) {
    retained *= 1.0 - (fund.mgmt_fees[j] + fund.protection_fees[j]);
  }
  auto weights = segfund_units(fund, indices);
  for (auto& w : weights) w *= retained;
  return weights;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

ValidationReport validate_correlation(const CorrelationMatrix& corr) {
  ValidationReport r;
  const std::size_t m = corr.size();
  bool entries_ok = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = corr(i, j);
      const std::string at = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (!std::isfinite(v)) {
        r.add("correlation not finite at " + at);
        entries_ok = false;
      } else if (i == j && std::abs(v - 1.0) > 1e-12) {
        r.add("correlation diagonal not 1 at " + at);
        entries_ok = false;
      } else if (v < -1.0 || v > 1.0) {
        r.add("correlation out of range at " + at);
        entries_ok = false;
      } else if (j > i && std::abs(v - corr(j, i)) > 1e-12) {
        r.add("correlation not symmetric at " + at);
        entries_ok = false;
      }
    }
  }
  if (entries_ok && !semidefinite_cholesky(corr)) {
    r.add("correlation not positive semidefinite");
  }
  return r;
}

ValidationReport validate_indices(std::span<const IndexSpec> indices) {
  ValidationReport r;
  if (indices.empty()) r.add("no indices");
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto& idx = indices[j];
    if (!std::isfinite(idx.spot) || !(idx.spot > 0.0)) r.add(fmt_index(j) + ": spot must be positive");
    if (!std::isfinite(idx.vol) || idx.vol < 0.0) r.add(fmt_index(j) + ": vol must be nonnegative");
    if (!std::isfinite(idx.div_yield)) r.add(fmt_index(j) + ": dividend yield not finite");
    if (idx.drift_override && !std::isfinite(*idx.drift_override)) {
      r.add(fmt_index(j) + ": drift override not finite");
    }
  }
  return r;
}

namespace {

void check_correlation_size(ValidationReport& r, const CorrelationMatrix& corr, std::size_t m) {
  if (corr.size() != m) {
    r.add("correlation is " + std::to_string(corr.size()) + "x" + std::to_string(corr.size()) +
          " but there are " + std::to_string(m) + " indices");
  } else {
    for (auto& v : validate_correlation(corr).violations) r.add(std::move(v));
  }
}

}  // namespace

ValidationReport validate_market(const BasketSpec& basket, const CorrelationMatrix& corr,
                                 const ObservationSchedule& schedule,
                                 const DiscountSpec& discount) {
  ValidationReport r = validate_indices(basket.indices());
  for (std::size_t j = 0; j < basket.size(); ++j) {
    if (!(basket.weights()[j] > 0.0)) r.add(fmt_index(j) + ": weight must be positive");
  }
  check_correlation_size(r, corr, basket.size());

  const auto& t = schedule.times;
  if (t.empty()) r.add("observation schedule is empty");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || !(t[k] > 0.0)) {
      r.add("observation time " + std::to_string(k + 1) + " must be positive");
    }
    if (k > 0 && !(t[k] > t[k - 1])) {
      r.add("times not increasing at observation " + std::to_string(k + 1));
    }
  }
  if (!std::isfinite(schedule.maturity) || !(schedule.maturity > 0.0)) {
    r.add("maturity must be positive");
  } else if (!t.empty() && t.back() > schedule.maturity) {
    r.add("last observation after maturity");
  }
  if (!std::isfinite(discount.rate)) r.add("rate not finite");
  return r;
}

ValidationReport validate_segfund(const SegFundSpec& fund, std::span<const IndexSpec> indices,
                                  const CorrelationMatrix& corr, double maturity) {
  ValidationReport r = validate_indices(indices);
  check_correlation_size(r, corr, indices.size());
  if (!std::isfinite(fund.principal) || !(fund.principal > 0.0)) r.add("principal must be positive");
  if (fund.allocations.size() != indices.size()) {
    r.add("allocations do not match the number of indices");
  } else {
    double total = 0.0;
    for (double v : fund.allocations) {
      if (!std::isfinite(v) || v < 0.0) r.add("allocation must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) r.add("allocations do not sum to 1");
  }
  const std::size_t nfees = fund.fee_times.size();
  if (fund.mgmt_fees.size() != nfees || fund.protection_fees.size() != nfees) {
    r.add("fee schedule lengths differ");
  } else {
    for (std::size_t j = 0; j < nfees; ++j) {
      const double m = fund.mgmt_fees[j];
      const double p = fund.protection_fees[j];
      if (!(m >= 0.0 && m < 1.0)) r.add("management fee out of [0,1) at " + std::to_string(j + 1));
      if (!(p >= 0.0 && p < 1.0)) r.add("protection fee out of [0,1) at " + std::to_string(j + 1));
      if (!(m + p < 1.0)) r.add("total fee not below 1 at " + std::to_string(j + 1));
    }
  }
  for (std::size_t j = 0; j < nfees; ++j) {
    const double t = fund.fee_times[j];
    if (!(t > 0.0) || (j > 0 && !(t > fund.fee_times[j - 1]))) {
      r.add("fee times not increasing at " + std::to_string(j + 1));
    }
    if (!(t < maturity)) r.add("fee time " + std::to_string(j + 1) + " not before maturity");
  }
  if (!std::isfinite(maturity) || !(maturity > 0.0)) r.add("maturity must be positive");
  return r;
}

void require_valid(const ValidationReport& report) {
  if (!report.ok()) throw Error(ErrorKind::kInvalidMarket, report.summary());
}

long parse_iso_date(std::string_view iso) {
  using namespace std::chrono;
  auto bad = [&] { return Error(ErrorKind::kInvalidInput, "unparseable date '" + std::string(iso) + "'"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse = [&](std::size_t pos, std::size_t len, auto& out) {
    const char* first = iso.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    if (ec != std::errc{} || ptr != first + len) throw bad();
  };
  parse(0, 4, y);
  parse(5, 2, m);
  parse(8, 2, d);
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw bad();
  return sys_days{ymd}.time_since_epoch().count();
}

double year_fraction_act365(std::string_view from, std::string_view to) {
  return static_cast<double>(parse_iso_date(to) - parse_iso_date(from)) / 365.0;
}

ObservationSchedule build_schedule_from_dates(std::string_view valuation_date,
                                              std::span<const std::string> dates,
                                              std::string_view maturity_date) {
  const long v = parse_iso_date(valuation_date);
  ObservationSchedule s;
  s.times.reserve(dates.size());
  for (const auto& d : dates) {
    const long day = parse_iso_date(d);
    if (day <= v) {
      throw Error(ErrorKind::kInvalidInput,
                  "observation date " + d + " is not after the valuation date");
    }
    s.times.push_back(static_cast<double>(day - v) / 365.0);
  }
  const long mat = parse_iso_date(maturity_date);
  if (mat <= v) throw Error(ErrorKind::kInvalidInput, "maturity is not after the valuation date");
  s.maturity = static_cast<double>(mat - v) / 365.0;
  return s;
}

}  // namespace eqlink
