#pragma once

#include <array>
#include <cstdint>

namespace eqlink {

/// Philox4x32-10 counter-based generator: a keyed bijection of a 128-bit
/// counter, so any draw is a pure function of (key, counter).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Normal draws for one Monte Carlo path. The stream is a function of
/// (seed, path index) only.
class PathNormalStream {
 public:
  PathNormalStream(std::uint64_t seed, std::uint64_t path);

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double next_uniform();
  double next_normal();

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter block_{};
  int used_ = 4;  // words of block_ already consumed
};

}  // namespace eqlink
