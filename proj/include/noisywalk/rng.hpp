#pragma once

#include <array>
#include <cstdint>

namespace noisywalk {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is addressed by (seed, stream, purpose).  The seed is the key;
/// stream and purpose occupy the high counter words, and the low word counts
/// blocks, so every (seed, stream, purpose) triple gets a disjoint sequence
/// that depends on nothing but its address.  That is what makes trial t's
/// draws independent of which worker runs it.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block encrypt(Block counter, Key key) noexcept;

  Philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint32_t purpose = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  Key key_;
  Block counter_;
  Block buffer_{};
  int available_ = 0;
};

/// Stream purposes, so one seed can drive several independent experiments.
namespace purpose {
inline constexpr std::uint32_t kWalk = 0;
inline constexpr std::uint32_t kReference = 1;  // independent-coupling runs
inline constexpr std::uint32_t kCenters = 2;    // center selection
}  // namespace purpose

}  // namespace noisywalk
