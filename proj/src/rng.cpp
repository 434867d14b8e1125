#include "surveymix/rng.hpp"

#include <cmath>
#include <numbers>

namespace surveymix {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox_round(
    const std::array<std::uint32_t, 4>& c,
    const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
  return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
          std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
}

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = philox_round(counter, key);
  }
  return counter;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  const std::uint64_t key64 = seed ^ mix64(stream_id);
  key_ = {std::uint32_t(key64), std::uint32_t(key64 >> 32)};
}

RngStream RngStream::at(std::uint64_t unit) const {
  RngStream s(*this);
  s.unit_ = unit;
  s.counter_ = 0;
  s.buf_pos_ = 2;
  return s;
}

std::uint64_t RngStream::next_u64() {
  if (buf_pos_ == 2) {
    const std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
        std::uint32_t(unit_), std::uint32_t(unit_ >> 32)};
    const auto out = philox4x32(ctr, key_);
    buf_[0] = std::uint64_t(out[0]) | (std::uint64_t(out[1]) << 32);
    buf_[1] = std::uint64_t(out[2]) | (std::uint64_t(out[3]) << 32);
    ++counter_;
    buf_pos_ = 0;
  }
  return buf_[buf_pos_++];
}

double RngStream::uniform01() {
  // 53 random bits, shifted into (0,1).
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace surveymix
