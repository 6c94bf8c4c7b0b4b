#pragma once

#include <cstdint>
#include <random>

namespace bittide {

constexpr std::uint64_t gray_encode(std::uint64_t x) noexcept { return x ^ (x >> 1); }

constexpr std::uint64_t gray_decode(std::uint64_t g) noexcept {
  for (unsigned shift = 1; shift < 64; shift <<= 1) g ^= g >> shift;
  return g;
}

/// Counter cycling through [0, 2^width).
class WrappingCounter {
 public:
  explicit WrappingCounter(unsigned width_bits, std::uint64_t value = 0);

  unsigned width() const noexcept { return width_; }
  std::uint64_t value() const noexcept { return value_; }
  std::uint64_t modulus() const noexcept { return mask_ + 1; }

  void advance(std::uint64_t n = 1) noexcept { value_ = (value_ + n) & mask_; }
  void set(std::uint64_t count) noexcept { value_ = count & mask_; }

 private:
  unsigned width_;
  std::uint64_t mask_;
  std::uint64_t value_;
};

/// Gray code of a counter as seen from another clock domain. A sample taken
/// mid-transition resolves to either the old or the new code, never a third
/// value; which one is drawn from `rng`.
std::uint64_t sample_gray(const WrappingCounter& counter, bool mid_transition, std::mt19937_64& rng);

/// Wide reconstruction of a narrow wrapping counter.
struct ExtendedCounter {
  unsigned width_bits = 16;      ///< width of the sampled low counter
  std::uint64_t extended = 0;    ///< full 64-bit count; extended mod 2^width == low
};

/// Advances `prev` to the smallest count >= prev.extended congruent to
/// `sampled_low`. A backward step of exactly one (a mid-transition sample
/// resolving to the old value) is accepted. Any advance of 2^(width-1) or
/// more throws SimulationFault(accounting) at simulated time `t`.
ExtendedCounter extend(ExtendedCounter prev, std::uint64_t sampled_low, double t = 0.0);

/// Signed 32-bit DDC reading; zero means half full.
struct DdcOccupancy {
  std::int32_t value = 0;
};

DdcOccupancy ddc_occupancy(const ExtendedCounter& rx, const ExtendedCounter& tx) noexcept;

/// Bounded FIFO occupancy. Only counts are tracked; payloads belong to the
/// caller.
class ElasticBuffer {
 public:
  explicit ElasticBuffer(std::int64_t depth = 32, std::int64_t occupancy = 0);

  std::int64_t depth() const noexcept { return depth_; }
  std::int64_t occupancy() const noexcept { return occupancy_; }
  std::uint64_t writes() const noexcept { return writes_; }
  std::uint64_t reads() const noexcept { return reads_; }

  /// Throws SimulationFault(overflow) when full.
  void push(double t = 0.0);
  /// Throws SimulationFault(underflow) when empty.
  void pop(double t = 0.0);

 private:
  std::int64_t depth_;
  std::int64_t occupancy_;
  std::uint64_t writes_ = 0;
  std::uint64_t reads_ = 0;
};

/// Checks that an externally computed occupancy lies in [0, depth]; throws
/// the matching overflow/underflow fault otherwise.
void check_occupancy(std::int64_t occupancy, std::int64_t depth, double t);

struct ReframeResult {
  ElasticBuffer buffer;
  std::int64_t lambda_delta = 0;  ///< change in the link's logical latency
};

/// Idealized recentering: replaces a virtual buffer reading with a real
/// buffer holding `eb_init` frames.
ReframeResult reframe(DdcOccupancy ddc, std::int64_t eb_init, std::int64_t depth = 32);

}  // namespace bittide
