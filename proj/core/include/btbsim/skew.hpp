#ifndef BTBSIM_SKEW_HPP
#define BTBSIM_SKEW_HPP

#include <cstdint>

#include "btbsim/trace.hpp"

namespace btbsim {

/// Rotate the low `width` bits of `value` left by `amount`.
constexpr std::uint64_t rotl_bits(std::uint64_t value, unsigned amount,
                                  unsigned width) {
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  value &= mask;
  amount %= width;
  if (amount == 0) return value;
  return ((value << amount) | (value >> (width - amount))) & mask;
}

/// Per-bank set index over 2^s sets:
///   x1 ^ rotl_s(x2, bank) ^ rotl_s(x3, 2*bank mod s)
/// where x1, x2, x3 are pc bits [0,s), [s,2s), [2s,3s). Requires 3s <= 57.
std::uint32_t skew_index(Addr pc, unsigned bank, unsigned s);

/// Lower 28 bits of the pc, the MBTB tag.
constexpr std::uint32_t tag_lower28(Addr pc) {
  return static_cast<std::uint32_t>(pc & ((Addr{1} << 28) - 1));
}

/// XOR-folds a 28-bit tag into `bits` bits (identity for bits >= 28).
constexpr std::uint32_t fold_tag(std::uint32_t tag28, unsigned bits) {
  if (bits >= 28) return tag28;
  const std::uint32_t mask = (std::uint32_t{1} << bits) - 1;
  std::uint32_t folded = 0;
  for (unsigned shift = 0; shift < 28; shift += bits) folded ^= tag28 >> shift;
  return folded & mask;
}

}  // namespace btbsim

#endif  // BTBSIM_SKEW_HPP
