#include "btbsim/skew.hpp"

#include <cassert>

namespace btbsim {

std::uint32_t skew_index(Addr pc, unsigned bank, unsigned s) {
  assert(s > 0 && 3 * s <= kAddrBits);
  const std::uint64_t mask = (std::uint64_t{1} << s) - 1;
  const std::uint64_t x1 = pc & mask;
  const std::uint64_t x2 = (pc >> s) & mask;
  const std::uint64_t x3 = (pc >> (2 * s)) & mask;
  return static_cast<std::uint32_t>(x1 ^ rotl_bits(x2, bank, s) ^
                                    rotl_bits(x3, (2 * bank) % s, s));
}

}  // namespace btbsim
