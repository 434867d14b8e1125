#pragma once

#include <array>
#include <cstdint>

namespace surveymix {

// One keyed block of the Philox4x32-10 counter-based generator
// (Salmon, Moraes, Dror, Shaw 2011). 128 counter bits in, 128 random
// bits out.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Reproducible random stream. The key is derived from (seed, stream_id);
// streams sharing a seed but differing in stream_id are guaranteed
// disjoint because the stream_id enters through a bijective mixer. The
// 128-bit counter is split into a 64-bit draw-site id ("unit") and a
// 64-bit within-site position, so a chain can hand every draw site of a
// sweep its own substream: results are then independent of the order in
// which sites are visited, which is what lets the OpenMP kernels match
// the serial ones bit for bit.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  // Substream positioned at draw site `unit`, counter rewound to zero.
  RngStream at(std::uint64_t unit) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t unit() const { return unit_; }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1); never returns 0 or 1, so it is
  // safe under log().
  double uniform01();
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t unit_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int buf_pos_ = 2;  // 2 = buffer empty
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

// Draw-site id for sweep-structured samplers: the sweep number occupies
// the high 32 bits, the site index within the sweep the low 32.
inline std::uint64_t unit_id(std::uint64_t sweep, std::uint64_t site) {
  return (sweep << 32) | site;
}

}  // namespace surveymix
