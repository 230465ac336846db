#include "eqlink/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "eqlink/error.hpp"
#include "eqlink/philox.hpp"

namespace eqlink {

namespace {

// Reduction granularity. Fixed so that chunking never changes the
// floating-point merge order.
constexpr std::uint64_t kBlockPaths = 1024;

}  // namespace

unsigned default_thread_count() {
  if (const char* env = std::getenv("EQLINK_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

GbmPathSampler::GbmPathSampler(std::span<const IndexSpec> indices, const CorrelationMatrix& corr,
                               std::span<const double> times, double rate)
    : times_(times.begin(), times.end()) {
  const std::size_t m = indices.size();
  if (corr.size() != m) throw Error(ErrorKind::kInvalidInput, "correlation size does not match indices");
  require_valid(validate_indices(indices));
  if (times_.empty()) throw Error(ErrorKind::kInvalidInput, "empty simulation grid");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double prev = k == 0 ? 0.0 : times_[k - 1];
    if (!(times_[k] > prev)) throw Error(ErrorKind::kInvalidInput, "simulation times not increasing");
  }
  auto chol = semidefinite_cholesky(corr, 1e-10);
  if (!chol) {
    throw Error(ErrorKind::kNotPositiveSemidefinite, "correlation not positive semidefinite");
  }
  chol_ = std::move(*chol);

  spots_.reserve(m);
  for (const auto& idx : indices) spots_.push_back(idx.spot);
  log_drift_.resize(times_.size() * m);
  log_vol_.resize(times_.size() * m);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double dt = times_[k] - (k == 0 ? 0.0 : times_[k - 1]);
    for (std::size_t j = 0; j < m; ++j) {
      const double mu = indices[j].effective_drift(rate);
      const double sigma = indices[j].vol;
      log_drift_[k * m + j] = (mu - 0.5 * sigma * sigma) * dt;
      log_vol_[k * m + j] = sigma * std::sqrt(dt);
    }
  }
}

void GbmPathSampler::levels(std::span<const double> normals, std::span<double> out) const {
  const std::size_t m = num_indices();
  const std::size_t n = num_times();
  // Accumulate log-returns in place, then exponentiate.
  for (std::size_t k = 0; k < n; ++k) {
    const double* z = normals.data() + k * m;
    for (std::size_t j = 0; j < m; ++j) {
      double w = 0.0;
      for (std::size_t i = 0; i <= j; ++i) w += chol_[j * m + i] * z[i];
      const double prev = k == 0 ? 0.0 : out[(k - 1) * m + j];
      out[k * m + j] = prev + log_drift_[k * m + j] + log_vol_[k * m + j] * w;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < m; ++j) out[k * m + j] = spots_[j] * std::exp(out[k * m + j]);
  }
}

void GbmPathSampler::path(std::uint64_t seed, std::uint64_t path_index,
                          std::span<double> out) const {
  std::vector<double> z(normals_per_path());
  PathNormalStream stream(seed, path_index);
  for (auto& v : z) v = stream.next_normal();
  levels(z, out);
}

GbmPathSampler simulate_basket_paths(const BasketSpec& basket, const CorrelationMatrix& corr,
                                     const ObservationSchedule& schedule,
                                     const DiscountSpec& discount) {
  require_valid(validate_market(basket, corr, schedule, discount));
  return GbmPathSampler(basket.indices(), corr, schedule.times, discount.rate);
}

std::vector<McEstimate> run_paths(const McConfig& config, std::size_t normals_per_path,
                                  std::size_t n_outputs, const PathKernel& kernel) {
  if (config.n_paths == 0) throw Error(ErrorKind::kInvalidInput, "n_paths must be at least 1");
  const std::uint64_t n_blocks = (config.n_paths + kBlockPaths - 1) / kBlockPaths;
  const std::uint64_t blocks_per_unit =
      std::max<std::uint64_t>(1, (config.chunk_size + kBlockPaths - 1) / kBlockPaths);
  const std::uint64_t n_units = (n_blocks + blocks_per_unit - 1) / blocks_per_unit;
  const unsigned requested = config.threads == 0 ? default_thread_count() : config.threads;
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, requested), n_units));

  std::vector<RunningStats> block_stats(n_blocks * n_outputs);
  std::atomic<std::uint64_t> next_unit{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      std::vector<double> z(normals_per_path), z_mirror(normals_per_path);
      std::vector<double> out(n_outputs), out_mirror(n_outputs);
      for (;;) {
        const std::uint64_t unit = next_unit.fetch_add(1);
        if (unit >= n_units) break;
        const std::uint64_t first_block = unit * blocks_per_unit;
        const std::uint64_t last_block = std::min(n_blocks, first_block + blocks_per_unit);
        for (std::uint64_t b = first_block; b < last_block; ++b) {
          RunningStats* stats = block_stats.data() + b * n_outputs;
          const std::uint64_t begin = b * kBlockPaths;
          const std::uint64_t end = std::min(config.n_paths, begin + kBlockPaths);
          for (std::uint64_t p = begin; p < end; ++p) {
            PathNormalStream stream(config.seed, p);
            for (auto& v : z) v = stream.next_normal();
            kernel(z, out);
            if (config.antithetic) {
              for (std::size_t i = 0; i < z.size(); ++i) z_mirror[i] = -z[i];
              kernel(z_mirror, out_mirror);
              for (std::size_t o = 0; o < n_outputs; ++o) out[o] = 0.5 * (out[o] + out_mirror[o]);
            }
            for (std::size_t o = 0; o < n_outputs; ++o) stats[o].add(out[o]);
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_unit.store(n_units);
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<McEstimate> result(n_outputs);
  for (std::size_t o = 0; o < n_outputs; ++o) {
    RunningStats total;
    for (std::uint64_t b = 0; b < n_blocks; ++b) total.merge(block_stats[b * n_outputs + o]);
    result[o].mean = total.mean();
    result[o].std_error = std::sqrt(total.variance() / static_cast<double>(total.count()));
    result[o].n_paths = total.count();
  }
  return result;
}

namespace {

McEstimate price_asian(const AsianCallContract& c, double guaranteed, const McConfig& config) {
  const GbmPathSampler sampler = simulate_basket_paths(c.basket, c.corr, c.schedule, c.discount);
  const std::size_t m = sampler.num_indices();
  const std::size_t n = sampler.num_times();
  const std::vector<double> alphas = c.basket.alphas();
  const double strike = c.basket.strike();
  const double df = c.discount.discount_factor(c.schedule.maturity);
  const PathKernel kernel = [&](std::span<const double> z, std::span<double> out) {
    thread_local std::vector<double> lv;
    lv.resize(m * n);
    sampler.levels(z, lv);
    double avg = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < m; ++j) avg += alphas[j] * lv[k * m + j];
    }
    avg /= static_cast<double>(n);
    out[0] = df * (guaranteed + std::max(avg - strike, 0.0));
  };
  return run_paths(config, sampler.normals_per_path(), 1, kernel)[0];
}

McEstimate price_segfund(const SegFundContract& c, const McConfig& config) {
  require_valid(validate_segfund(c.fund, c.indices, c.corr, c.maturity));
  const auto weights = segfund_terminal_weights(c.fund, c.indices);
  const double times[] = {c.maturity};
  const GbmPathSampler sampler(c.indices, c.corr, times, c.discount.rate);
  const std::size_t m = sampler.num_indices();
  const double df = c.discount.discount_factor(c.maturity);
  const double principal = c.fund.principal;
  const PathKernel kernel = [&](std::span<const double> z, std::span<double> out) {
    thread_local std::vector<double> lv;
    lv.resize(m);
    sampler.levels(z, lv);
    double fund_value = 0.0;
    for (std::size_t j = 0; j < m; ++j) fund_value += weights[j] * lv[j];
    out[0] = df * std::max(principal - fund_value, 0.0);
  };
  return run_paths(config, sampler.normals_per_path(), 1, kernel)[0];
}

McEstimate price_floored(const FlooredReturnContract& c, const McConfig& config) {
  if (c.times.size() < 2) throw Error(ErrorKind::kInvalidInput, "need t_0 and at least one return");
  std::vector<double> grid;
  for (std::size_t i = 1; i < c.times.size(); ++i) grid.push_back(c.times[i] - c.times.front());
  const IndexSpec index{"floored", 1.0, c.vol, c.div_yield, std::nullopt};
  const GbmPathSampler sampler(std::span(&index, 1), CorrelationMatrix::identity(1), grid, c.rate);
  const std::size_t n = grid.size();
  const double df = std::exp(-c.rate * c.times.back());
  const PathKernel kernel = [&](std::span<const double> z, std::span<double> out) {
    thread_local std::vector<double> lv;
    lv.resize(n);
    sampler.levels(z, lv);
    double total = 0.0;
    double prev = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += std::max(lv[k] / prev - 1.0, c.floor);
      prev = lv[k];
    }
    out[0] = df * total;
  };
  return run_paths(config, sampler.normals_per_path(), 1, kernel)[0];
}

}  // namespace

McEstimate mc_price(const McPayoff& payoff, const McConfig& config) {
  struct Visitor {
    const McConfig& config;
    McEstimate operator()(const AsianCallContract& c) const { return price_asian(c, 0.0, config); }
    McEstimate operator()(const SecurityContract& c) const {
      if (!(c.guarantee.guaranteed_amount >= 0.0)) {
        throw Error(ErrorKind::kInvalidInput, "guaranteed amount must be nonnegative");
      }
      return price_asian(c.option, c.guarantee.guaranteed_amount, config);
    }
    McEstimate operator()(const SegFundContract& c) const { return price_segfund(c, config); }
    McEstimate operator()(const FlooredReturnContract& c) const { return price_floored(c, config); }
  };
  return std::visit(Visitor{config}, payoff);
}

std::array<McEstimate, 3> mc_basket_moments(const GbmPathSampler& sampler,
                                            std::span<const double> units,
                                            const McConfig& config) {
  const std::size_t m = sampler.num_indices();
  const std::size_t n = sampler.num_times();
  if (units.size() != m) throw Error(ErrorKind::kInvalidInput, "units do not match indices");
  const std::vector<double> u(units.begin(), units.end());
  const PathKernel kernel = [&](std::span<const double> z, std::span<double> out) {
    thread_local std::vector<double> lv;
    lv.resize(m * n);
    sampler.levels(z, lv);
    double y = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < m; ++j) y += u[j] * lv[k * m + j];
    }
    y /= static_cast<double>(n);
    out[0] = y;
    out[1] = y * y;
    out[2] = y * y * y;
  };
  const auto est = run_paths(config, sampler.normals_per_path(), 3, kernel);
  return {est[0], est[1], est[2]};
}

}  // namespace eqlink
