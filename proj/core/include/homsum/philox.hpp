#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace homsum {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter), so every Monte Carlo draw can
/// own an independent stream addressed by its draw index.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Sequential view over the Philox stream with fixed (seed, stream) identity.
///
/// Block b of stream s is Philox(key = seed, counter = (s_lo, s_hi, b_lo, b_hi)).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double next_open01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; variates are produced in pairs.
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_open01();
    const double u2 = next_open01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// +1 or -1 with equal probability, one bit per call.
  double next_sign() noexcept {
    if (bits_left_ == 0) {
      bits_ = next_u32();
      bits_left_ = 32;
    }
    const double s = (bits_ & 1u) ? 1.0 : -1.0;
    bits_ >>= 1;
    --bits_left_;
    return s;
  }

 private:
  void refill() noexcept {
    buffer_ = Philox4x32::apply({stream_lo_, stream_hi_, static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32)},
                                key_);
    ++block_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint32_t bits_ = 0;
  int bits_left_ = 0;
};

}  // namespace homsum
