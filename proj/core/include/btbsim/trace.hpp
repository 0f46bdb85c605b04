#ifndef BTBSIM_TRACE_HPP
#define BTBSIM_TRACE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace btbsim {

using Addr = std::uint64_t;

/// Virtual instruction addresses are 57 bits wide (five-level paging).
inline constexpr unsigned kAddrBits = 57;
inline constexpr Addr kAddrLimit = Addr{1} << kAddrBits;
inline constexpr Addr kAddrMask = kAddrLimit - 1;

/// A call's return address is the call pc plus this many bytes.
inline constexpr Addr kReturnAddressStride = 4;

enum class BranchKind : std::uint8_t {
  ConditionalDirect = 0,
  UnconditionalDirectJump = 1,
  DirectCall = 2,
  IndirectJump = 3,
  IndirectCall = 4,
  Return = 5,
};

inline constexpr std::size_t kBranchKindCount = 6;

inline constexpr std::array<BranchKind, kBranchKindCount> kAllBranchKinds = {
    BranchKind::ConditionalDirect, BranchKind::UnconditionalDirectJump,
    BranchKind::DirectCall,        BranchKind::IndirectJump,
    BranchKind::IndirectCall,      BranchKind::Return,
};

std::string_view kind_name(BranchKind kind);
std::optional<BranchKind> kind_from_name(std::string_view name);

constexpr std::size_t kind_index(BranchKind kind) {
  return static_cast<std::size_t>(kind);
}

constexpr bool is_call(BranchKind kind) {
  return kind == BranchKind::DirectCall || kind == BranchKind::IndirectCall;
}

constexpr bool is_indirect(BranchKind kind) {
  return kind == BranchKind::IndirectJump || kind == BranchKind::IndirectCall;
}

/// Direct branches (conditional, jump, call) have targets computable at decode.
constexpr bool target_known_at_decode(BranchKind kind) {
  return kind == BranchKind::ConditionalDirect ||
         kind == BranchKind::UnconditionalDirectJump ||
         kind == BranchKind::DirectCall;
}

/// One dynamic branch, preceded by `gap` non-branch instructions.
struct TraceEvent {
  Addr pc = 0;
  std::uint32_t gap = 0;
  BranchKind kind = BranchKind::ConditionalDirect;
  bool taken = false;
  Addr target = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws TraceError when the event breaks a format invariant.
void validate_event(const TraceEvent& event);

/// Number of magnitude bits needed for |target - pc|; a zero offset counts as 1.
unsigned offset_width(Addr pc, Addr target);

struct TraceStats {
  std::array<std::uint64_t, kBranchKindCount> dynamic{};
  std::uint64_t unique_pcs = 0;
  std::uint64_t unique_taken = 0;
  // width_hist[kind][b] for b in 1..57; index 0 stays zero.
  std::array<std::array<std::uint64_t, kAddrBits + 1>, kBranchKindCount>
      width_hist{};

  std::uint64_t events() const;
  /// Width histogram summed over kinds.
  std::array<std::uint64_t, kAddrBits + 1> combined_width_hist() const;
};

TraceStats trace_stats(std::span<const TraceEvent> events);

}  // namespace btbsim

#endif  // BTBSIM_TRACE_HPP
