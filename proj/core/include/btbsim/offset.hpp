#ifndef BTBSIM_OFFSET_HPP
#define BTBSIM_OFFSET_HPP

#include <cstdint>
#include <optional>

#include "btbsim/trace.hpp"

namespace btbsim {

/// Sign-magnitude branch offset. The field is `width + 1` bits wide: the most
/// significant bit is the direction (1 = backward), the rest the magnitude.
/// (backward, 0) is reserved as the EMPTY sentinel marking an unused slot; a
/// genuine zero offset is (forward, 0).
struct OffsetEncoding {
  bool backward = false;
  std::uint64_t magnitude = 0;

  constexpr bool is_empty() const { return backward && magnitude == 0; }

  friend constexpr bool operator==(const OffsetEncoding&,
                                   const OffsetEncoding&) = default;
};

inline constexpr OffsetEncoding kEmptyOffset{true, 0};

/// Offset of `target` from `pc`, or nullopt (too large) when |target - pc|
/// does not fit in `width` magnitude bits.
std::optional<OffsetEncoding> encode_offset(Addr pc, Addr target,
                                            unsigned width);

/// pc +/- magnitude modulo 2^57. Throws std::invalid_argument on EMPTY.
Addr decode_target(Addr pc, OffsetEncoding enc);

/// Packs into the (width + 1)-bit field layout and back.
constexpr std::uint64_t pack_offset(OffsetEncoding enc, unsigned width) {
  return (static_cast<std::uint64_t>(enc.backward) << width) | enc.magnitude;
}

constexpr OffsetEncoding unpack_offset(std::uint64_t field, unsigned width) {
  return {((field >> width) & 1) != 0, field & ((std::uint64_t{1} << width) - 1)};
}

}  // namespace btbsim

#endif  // BTBSIM_OFFSET_HPP
