#pragma once

#include <bit>
#include <cstdint>

#include "colorent/error.hpp"

namespace colorent {

inline constexpr int kMaxQubits = 24;

/// Element of Z_2^n: bit i of `bits()` is the state of qubit i.
class BitString {
 public:
  BitString(std::uint32_t bits, int n) : bits_(bits), n_(n) {
    if (n < 1 || n > kMaxQubits) throw UsageError("BitString: n must lie in [1, 24]");
    if (bits >> n) throw UsageError("BitString: value does not fit in n bits");
  }

  std::uint32_t bits() const noexcept { return bits_; }
  int size() const noexcept { return n_; }
  int weight() const noexcept { return std::popcount(bits_); }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::uint32_t bits_;
  int n_;
};

struct BitOps {
  BitString xor_bits;
  BitString or_bits;
  BitString and_bits;
  int weight_a;
};

inline BitOps bit_ops(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw UsageError("bit_ops: operands have different n");
  const int n = a.size();
  return {BitString(a.bits() ^ b.bits(), n), BitString(a.bits() | b.bits(), n),
          BitString(a.bits() & b.bits(), n), a.weight()};
}

/// Scatter the low bits of `value` into the set positions of `mask`.
inline std::uint32_t deposit_bits(std::uint32_t value, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::uint32_t bit = 1; mask; bit <<= 1) {
    const std::uint32_t low = mask & (~mask + 1);
    if (value & bit) out |= low;
    mask ^= low;
  }
  return out;
}

/// Gather the bits of `value` at the set positions of `mask` into the low bits.
inline std::uint32_t extract_bits(std::uint32_t value, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::uint32_t bit = 1; mask; bit <<= 1) {
    const std::uint32_t low = mask & (~mask + 1);
    if (value & low) out |= bit;
    mask ^= low;
  }
  return out;
}

}  // namespace colorent
