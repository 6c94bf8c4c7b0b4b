#include "bittide/buffers.hpp"

#include <string>

#include "bittide/error.hpp"

namespace bittide {

WrappingCounter::WrappingCounter(unsigned width_bits, std::uint64_t value)
    : width_(width_bits),
      mask_(width_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_bits) - 1),
      value_(value & mask_) {
  if (width_bits < 2 || width_bits > 64) throw ConfigError("counter width must be in [2, 64]");
}

std::uint64_t sample_gray(const WrappingCounter& counter, bool mid_transition, std::mt19937_64& rng) {
  std::uint64_t v = counter.value();
  if (mid_transition && (rng() & 1u)) v = (v - 1) & (counter.modulus() - 1);
  return gray_encode(v);
}

ExtendedCounter extend(ExtendedCounter prev, std::uint64_t sampled_low, double t) {
  const unsigned n = prev.width_bits;
  const std::uint64_t mask = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  const std::uint64_t delta = (sampled_low - prev.extended) & mask;
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  if (delta < half) {
    prev.extended += delta;
  } else if (delta == mask) {
    prev.extended -= 1;
  } else {
    throw SimulationFault(FaultKind::accounting, t,
                          "counter advanced by " + std::to_string(delta) +
                              " since the previous sample; a " + std::to_string(n) +
                              "-bit counter must be sampled within " + std::to_string(half - 1) +
                              " increments");
  }
  return prev;
}

DdcOccupancy ddc_occupancy(const ExtendedCounter& rx, const ExtendedCounter& tx) noexcept {
  return {static_cast<std::int32_t>(static_cast<std::uint32_t>(rx.extended - tx.extended))};
}

ElasticBuffer::ElasticBuffer(std::int64_t depth, std::int64_t occupancy)
    : depth_(depth), occupancy_(occupancy) {
  if (depth < 1) throw ConfigError("elastic buffer depth must be >= 1");
  if (occupancy < 0 || occupancy > depth) {
    throw ConfigError("initial occupancy " + std::to_string(occupancy) + " outside [0, " +
                      std::to_string(depth) + "]");
  }
}

void ElasticBuffer::push(double t) {
  if (occupancy_ >= depth_) {
    throw SimulationFault(FaultKind::overflow, t,
                          "elastic buffer overflow at t=" + std::to_string(t) + " s (depth " +
                              std::to_string(depth_) + ")");
  }
  ++occupancy_;
  ++writes_;
}

void ElasticBuffer::pop(double t) {
  if (occupancy_ <= 0) {
    throw SimulationFault(FaultKind::underflow, t,
                          "elastic buffer underflow at t=" + std::to_string(t) + " s");
  }
  --occupancy_;
  ++reads_;
}

void check_occupancy(std::int64_t occupancy, std::int64_t depth, double t) {
  if (occupancy > depth) {
    throw SimulationFault(FaultKind::overflow, t,
                          "elastic buffer overflow at t=" + std::to_string(t) + " s: occupancy " +
                              std::to_string(occupancy) + " > depth " + std::to_string(depth));
  }
  if (occupancy < 0) {
    throw SimulationFault(FaultKind::underflow, t,
                          "elastic buffer underflow at t=" + std::to_string(t) + " s: occupancy " +
                              std::to_string(occupancy));
  }
}

ReframeResult reframe(DdcOccupancy ddc, std::int64_t eb_init, std::int64_t depth) {
  return {ElasticBuffer(depth, eb_init), eb_init - static_cast<std::int64_t>(ddc.value)};
}

}  // namespace bittide
