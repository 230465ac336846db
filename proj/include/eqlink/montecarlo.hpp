#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "eqlink/market_model.hpp"

namespace eqlink {

struct McConfig {
  std::uint64_t n_paths = 500'000;
  std::uint64_t seed = 42;
  /// Each sample averages a path and its mirror (-z); n_paths counts samples.
  bool antithetic = false;
  /// Paths per work unit, rounded up to a whole number of reduction blocks.
  std::uint64_t chunk_size = 16'384;
  /// 0 selects default_thread_count().
  unsigned threads = 0;
};

/// EQLINK_THREADS if set to a positive integer, else hardware concurrency.
unsigned default_thread_count();

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
};

/// Welford accumulator; merge() is Chan's pairwise update.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Correlated GBM observed on a fixed time grid, stepped exactly in log space.
class GbmPathSampler {
 public:
  GbmPathSampler(std::span<const IndexSpec> indices, const CorrelationMatrix& corr,
                 std::span<const double> times, double rate);

  std::size_t num_indices() const { return spots_.size(); }
  std::size_t num_times() const { return times_.size(); }
  std::size_t normals_per_path() const { return num_indices() * num_times(); }
  const std::vector<double>& times() const { return times_; }

  /// Index levels for one path from independent standard normals;
  /// out[k * M + j] is index j at time t_k.
  void levels(std::span<const double> normals, std::span<double> out) const;
  /// Levels of path `path_index` of the stream `seed`.
  void path(std::uint64_t seed, std::uint64_t path_index, std::span<double> out) const;

 private:
  std::vector<double> spots_;
  std::vector<double> times_;
  std::vector<double> chol_;       // M x M lower triangular
  std::vector<double> log_drift_;  // (mu - sigma^2 / 2) dt, N x M
  std::vector<double> log_vol_;    // sigma sqrt(dt), N x M
};

GbmPathSampler simulate_basket_paths(const BasketSpec& basket, const CorrelationMatrix& corr,
                                     const ObservationSchedule& schedule,
                                     const DiscountSpec& discount);

/// Writes per-path outputs for one vector of standard normals.
using PathKernel = std::function<void(std::span<const double> normals, std::span<double> outputs)>;

/// Runs `kernel` over config.n_paths samples and returns mean and standard
/// error per output. Results are bit-identical for fixed (seed, n_paths)
/// whatever the thread count or chunk size.
std::vector<McEstimate> run_paths(const McConfig& config, std::size_t normals_per_path,
                                  std::size_t n_outputs, const PathKernel& kernel);

struct AsianCallContract {
  BasketSpec basket;
  CorrelationMatrix corr;
  ObservationSchedule schedule;
  DiscountSpec discount;
};

struct SecurityContract {
  GuaranteeSpec guarantee;
  AsianCallContract option;
};

struct SegFundContract {
  SegFundSpec fund;
  std::vector<IndexSpec> indices;
  CorrelationMatrix corr;
  DiscountSpec discount;
  double maturity = 0.0;
};

/// sum_i max(I_i / I_{i-1} - 1, floor) on one index over times t_0 < ... < t_M.
struct FlooredReturnContract {
  std::vector<double> times;
  double vol = 0.0;
  double rate = 0.0;
  double div_yield = 0.0;
  double floor = -1.0;
};

using McPayoff = std::variant<AsianCallContract, SecurityContract, SegFundContract,
                              FlooredReturnContract>;

/// Discounted Monte Carlo value of the payoff.
McEstimate mc_price(const McPayoff& payoff, const McConfig& config);

/// Sample estimates of E Y, E Y^2, E Y^3 (undiscounted) for
/// Y = (1/N) sum_k sum_j units_j I_{t_k}^j on the sampler grid.
std::array<McEstimate, 3> mc_basket_moments(const GbmPathSampler& sampler,
                                            std::span<const double> units,
                                            const McConfig& config);

}  // namespace eqlink
