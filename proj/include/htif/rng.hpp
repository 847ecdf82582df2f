#pragma once

#include <array>
#include <cstdint>

namespace htif {

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

// Philox4x64-10 block function (Salmon et al., Random123). Pure: the output is a
// function of (counter, key) only, which is what makes random access and
// coordination-free parallel streams possible.
PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

// Maps the top 53 bits of a 64-bit word onto [0, 1).
inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seeded random-number contract shared by every sampler.
///
/// The key is (seed, stream_id); identical keys yield bit-identical streams.
/// Two access patterns coexist without overlapping:
///  - sequential draws (`next_u64`, `next_uniform`) walk counter (block, 0, 0, 0);
///  - addressed draws (`block_at`, `uniform_at`) read counter (a, b, c, 1) and
///    do not advance the sequential position.
/// A handle is a value: copying it forks the sequential position. It must not
/// be shared between threads; distinct handles may be used concurrently.
class RngHandle {
 public:
  RngHandle(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

  std::uint64_t next_u64();
  double next_uniform() { return to_unit_interval(next_u64()); }

  PhiloxCounter block_at(std::uint64_t a, std::uint64_t b, std::uint64_t c) const;
  double uniform_at(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return to_unit_interval(block_at(a, b, c)[0]);
  }

  // Handle for replication `index`: same seed, stream id derived by a bijective
  // mix of (stream_id, index). Replications of one experiment therefore never
  // share a key.
  RngHandle substream(std::uint64_t index) const;

 private:
  PhiloxKey key_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  unsigned used_ = 4;
};

}  // namespace htif
