#include "btbsim/offset.hpp"

#include <stdexcept>

namespace btbsim {

std::optional<OffsetEncoding> encode_offset(Addr pc, Addr target,
                                            unsigned width) {
  const bool backward = target < pc;
  const std::uint64_t magnitude = backward ? pc - target : target - pc;
  if (width < 64 && magnitude >= (std::uint64_t{1} << width)) {
    return std::nullopt;
  }
  // A zero delta is always (forward, 0), never the EMPTY sentinel.
  return OffsetEncoding{backward, magnitude};
}

Addr decode_target(Addr pc, OffsetEncoding enc) {
  if (enc.is_empty()) {
    throw std::invalid_argument("decode_target: EMPTY offset sentinel");
  }
  const Addr raw = enc.backward ? pc - enc.magnitude : pc + enc.magnitude;
  return raw & kAddrMask;
}

}  // namespace btbsim
