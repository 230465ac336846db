#include "eqlink/philox.hpp"

#include "eqlink/normal.hpp"

namespace eqlink {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

PathNormalStream::PathNormalStream(std::uint64_t seed, std::uint64_t path)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0u, 0u} {}

double PathNormalStream::next_uniform() {
  if (used_ == 4) {
    block_ = Philox4x32::generate(counter_, key_);
    if (++counter_[2] == 0) ++counter_[3];
    used_ = 0;
  }
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double PathNormalStream::next_normal() { return normal_quantile(next_uniform()); }

}  // namespace eqlink
