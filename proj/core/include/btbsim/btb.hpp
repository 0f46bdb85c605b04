#ifndef BTBSIM_BTB_HPP
#define BTBSIM_BTB_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "btbsim/trace.hpp"

namespace btbsim {

/// The two branch-type bits stored per BTB entry.
enum class KindCode : std::uint8_t {
  Conditional = 0,
  Direct = 1,    // unconditional jump or direct call
  Indirect = 2,  // indirect jump or indirect call
  Return = 3,
};

constexpr KindCode kind_code(BranchKind kind) {
  switch (kind) {
    case BranchKind::ConditionalDirect:
      return KindCode::Conditional;
    case BranchKind::UnconditionalDirectJump:
    case BranchKind::DirectCall:
      return KindCode::Direct;
    case BranchKind::IndirectJump:
    case BranchKind::IndirectCall:
      return KindCode::Indirect;
    case BranchKind::Return:
      return KindCode::Return;
  }
  return KindCode::Conditional;
}

/// A representative BranchKind for a stored code (used when one level of the
/// hierarchy fills another).
constexpr BranchKind representative_kind(KindCode code) {
  switch (code) {
    case KindCode::Conditional:
      return BranchKind::ConditionalDirect;
    case KindCode::Direct:
      return BranchKind::UnconditionalDirectJump;
    case KindCode::Indirect:
      return BranchKind::IndirectJump;
    case KindCode::Return:
      return BranchKind::Return;
  }
  return BranchKind::ConditionalDirect;
}

struct BtbHit {
  KindCode kind = KindCode::Conditional;
  /// Predicted target; meaningless when `is_return` (the RAS supplies it).
  Addr target = 0;
  bool is_return = false;
  /// Instrumentation only: the matching slot was written by a different pc
  /// (partial-tag alias). Not part of any storage budget.
  bool alias = false;
};

/// nullopt is a miss.
using LookupResult = std::optional<BtbHit>;

/// Branches displaced by one insertion, identified by their full pc.
class EvictionReport {
 public:
  static constexpr std::size_t kMax = 8;

  void add(Addr pc) { displaced_[count_++] = pc; }
  std::size_t count() const { return count_; }
  std::span<const Addr> branches() const { return {displaced_.data(), count_}; }

 private:
  std::array<Addr, kMax> displaced_{};
  std::size_t count_ = 0;
};

/// Common lookup/insert interface over every organization. Lookups may update
/// replacement state (LRU recency), hence non-const. `insert` on a resident
/// branch updates it in place when possible.
class Btb {
 public:
  virtual ~Btb() = default;

  virtual LookupResult lookup(Addr pc) = 0;
  virtual EvictionReport insert(Addr pc, Addr target, BranchKind kind) = 0;

  virtual std::uint64_t storage_bits() const = 0;
  /// Distinct branches currently recoverable from the structure.
  virtual std::size_t resident_branches() const = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Organization descriptions.

struct BaselineSpec {
  std::size_t sets = 2048;
  std::size_t ways = 4;
  unsigned tag_bits = 32;
  /// Defaults to log2(ways) rounded up.
  std::optional<unsigned> lru_bits;
};

struct SkewedSpec {
  std::size_t sets = 2048;  // per way, power of two
  std::size_t ways = 4;
  unsigned tag_bits = 32;
};

struct MbtbSpec {
  std::size_t sets_per_bank = 1024;  // power of two
  unsigned variant_mode = 2;         // 2, 3 or 4 entry variants
  bool skewed = true;                // false: every bank indexes pc mod sets
  bool compressed = true;            // false: every branch uses variant 0
};

struct FdipxTable {
  std::size_t entries = 0;
  unsigned offset_bits = 0;  // field width including the direction bit
  unsigned bits_per_entry = 0;
  std::size_t ways = 4;
};

struct FdipxSpec {
  std::vector<FdipxTable> tables = {
      {6144, 8, 29, 4},
      {6144, 13, 34, 4},
      {6144, 23, 44, 4},
      {896, 57, 77, 4},
  };
};

struct IdealSpec {};

using OrgSpec =
    std::variant<BaselineSpec, SkewedSpec, MbtbSpec, FdipxSpec, IdealSpec>;

struct BtbSpec {
  OrgSpec org = BaselineSpec{};
  unsigned latency = 2;
};

/// Analytic storage, entries x bits-per-entry summed over tables.
std::uint64_t storage_bits(const OrgSpec& org);
inline double storage_kb(std::uint64_t bits) {
  return static_cast<double>(bits) / 8.0 / 1024.0;
}
std::size_t total_entries(const OrgSpec& org);

/// Short descriptor such as "mbtb-4096e-2v" used in result tables.
std::string describe(const OrgSpec& org);

/// Throws std::invalid_argument on inconsistent geometry.
void validate(const OrgSpec& org);

std::unique_ptr<Btb> make_btb(const OrgSpec& org, std::uint64_t seed);

/// Commonly quoted FDIP-X total. The per-table arithmetic of the default
/// geometry gives 88.67 KB instead; storage reports print both.
inline constexpr double kFdipxTableReportedKb = 66.92;

}  // namespace btbsim

#endif  // BTBSIM_BTB_HPP
