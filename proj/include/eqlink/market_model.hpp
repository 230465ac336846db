#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eqlink {

/// One equity index following geometric Brownian motion.
struct IndexSpec {
  std::string name;
  double spot = 0.0;
  double vol = 0.0;
  double div_yield = 0.0;
  /// When set, replaces the risk-neutral drift r - q.
  std::optional<double> drift_override;

  double effective_drift(double rate) const {
    return drift_override ? *drift_override : rate - div_yield;
  }
};

/// Dense symmetric correlation matrix, row-major.
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  /// Rows must all have the same length as the number of rows.
  explicit CorrelationMatrix(const std::vector<std::vector<double>>& rows);

  static CorrelationMatrix identity(std::size_t m);
  /// Unit diagonal, every off-diagonal entry equal to rho.
  static CorrelationMatrix uniform(std::size_t m, double rho);

  std::size_t size() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * m_ + j]; }

 private:
  std::size_t m_ = 0;
  std::vector<double> entries_;
};

/// Lower-triangular factor L (row-major, m*m) with L L^T = corr. Zero pivots
/// within `tol` are accepted, so singular PSD matrices (e.g. rho = 1) factor.
/// Returns nullopt when the matrix is not PSD beyond the tolerance.
std::optional<std::vector<double>> semidefinite_cholesky(const CorrelationMatrix& corr,
                                                         double tol = 1e-10);

/// Basket Z_t = sum_j alpha_j I_t^j. The ratios alpha_j = w_j / I_0^j are fixed
/// when the basket is built; bumping a spot afterwards keeps them, so the
/// basket level moves with the index.
class BasketSpec {
 public:
  const std::vector<IndexSpec>& indices() const { return indices_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& alphas() const { return alphas_; }
  /// Strike X = sum of weights.
  double strike() const { return strike_; }
  std::size_t size() const { return indices_.size(); }

  /// alpha_j * current spot_j; equals weights at construction.
  std::vector<double> amplitudes() const;
  std::vector<double> drifts(double rate) const;
  std::vector<double> vols() const;

  BasketSpec with_spot(std::size_t j, double spot) const;
  BasketSpec with_vol(std::size_t j, double vol) const;
  /// sigma_j <- sigma_j * (1 + shift_percent / 100) for every index.
  BasketSpec with_vol_shift(double shift_percent) const;
  /// Overrides every drift, e.g. to pin mu while varying r.
  BasketSpec with_drift_override(double drift) const;

  friend BasketSpec build_basket(std::vector<IndexSpec> indices, std::vector<double> weights);

 private:
  std::vector<IndexSpec> indices_;
  std::vector<double> weights_;
  std::vector<double> alphas_;
  double strike_ = 0.0;
};

/// Throws Error(kInvalidInput) on dimension mismatch or nonpositive spot/weight.
BasketSpec build_basket(std::vector<IndexSpec> indices, std::vector<double> weights);

struct ObservationSchedule {
  std::vector<double> times;  // strictly increasing year fractions
  double maturity = 0.0;
};

struct DiscountSpec {
  double rate = 0.0;
  double discount_factor(double t) const;
};

/// Segregated fund with periodic management and protection fees.
struct SegFundSpec {
  double principal = 0.0;
  std::vector<double> allocations;  // fractions of principal, summing to 1
  std::vector<double> fee_times;
  std::vector<double> mgmt_fees;
  std::vector<double> protection_fees;
};

/// u_i = v_i P / I_0^i.
std::vector<double> segfund_units(const SegFundSpec& fund, std::span<const IndexSpec> indices);
/// w_i = u_i * prod_j (1 - (m_j + p_j)).
std::vector<double> segfund_terminal_weights(const SegFundSpec& fund,
                                             std::span<const IndexSpec> indices);

struct GuaranteeSpec {
  double guaranteed_amount = 0.0;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string v) { violations.push_back(std::move(v)); }
  /// Violations joined with "; ".
  std::string summary() const;
};

ValidationReport validate_correlation(const CorrelationMatrix& corr);
ValidationReport validate_indices(std::span<const IndexSpec> indices);
ValidationReport validate_market(const BasketSpec& basket, const CorrelationMatrix& corr,
                                 const ObservationSchedule& schedule,
                                 const DiscountSpec& discount);
ValidationReport validate_segfund(const SegFundSpec& fund, std::span<const IndexSpec> indices,
                                  const CorrelationMatrix& corr, double maturity);

/// Throws Error(kInvalidMarket) carrying the report summary when not ok.
void require_valid(const ValidationReport& report);

/// Days since 1970-01-01 for an ISO "YYYY-MM-DD" date; throws on malformed input.
long parse_iso_date(std::string_view iso);
/// ACT/365 fixed year fraction between two ISO dates.
double year_fraction_act365(std::string_view from, std::string_view to);

ObservationSchedule build_schedule_from_dates(std::string_view valuation_date,
                                              std::span<const std::string> dates,
                                              std::string_view maturity_date);

}  // namespace eqlink
