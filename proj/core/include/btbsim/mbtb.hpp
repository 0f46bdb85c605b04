#ifndef BTBSIM_MBTB_HPP
#define BTBSIM_MBTB_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "btbsim/btb.hpp"
#include "btbsim/offset.hpp"
#include "btbsim/rng.hpp"

namespace btbsim {

/// Field widths of one MBTB entry variant. Every variant fits the same
/// 88-bit payload (56 tag bits + 32 offset bits) behind a variant id and the
/// 2-bit kind code:
///
///   variant 0: one branch, T1 = 28-bit tag, full 57-bit target in T2|O1|O2
///   variant 1: two branches, 28-bit tags, 16-bit offset fields (15 + dir)
///   variant 2: four branches, 14-bit tags, 8-bit offset fields (7 + dir)
///   variant 3: eight branches, 7-bit tags, 4-bit offset fields (3 + dir)
///
/// Tags narrower than 28 bits are XOR-folds of the lower 28 pc bits.
struct VariantFormat {
  unsigned slots;
  unsigned tag_bits;
  unsigned field_bits;  // offset field including direction bit

  constexpr unsigned offset_width() const { return field_bits - 1; }
};

inline constexpr std::array<VariantFormat, 4> kVariantFormats = {{
    {1, 28, 60},
    {2, 28, 16},
    {4, 14, 8},
    {8, 7, 4},
}};

inline constexpr unsigned kMbtbBanks = 4;
inline constexpr unsigned kMbtbPayloadBits = 88;

/// Bits per entry for a variant mode: id bits + 2 kind bits + 88 payload.
/// 91 for the two-variant layout, 92 for three or four variants.
constexpr unsigned mbtb_entry_bits(unsigned variant_mode) {
  return (variant_mode <= 2 ? 1u : 2u) + 2u + kMbtbPayloadBits;
}

/// Compressed, skewed-indexed last-level BTB: four direct-mapped banks, one
/// skewed set index per bank, each entry holding one uncompressed branch or
/// several branches stored as offsets from their own pc.
class Mbtb final : public Btb {
 public:
  Mbtb(const MbtbSpec& spec, std::uint64_t seed);

  LookupResult lookup(Addr pc) override;
  EvictionReport insert(Addr pc, Addr target, BranchKind kind) override;
  std::uint64_t storage_bits() const override;
  std::size_t resident_branches() const override { return resident_; }
  std::string name() const override;

  /// Retargets a resident indirect branch. Rewrites the offset in place when
  /// it still fits the resident variant; otherwise frees the branch's slot
  /// and re-places it. Throws std::logic_error when pc is not a resident
  /// indirect branch.
  EvictionReport update_target(Addr pc, Addr new_target);

  /// Entry indices (bank * sets_per_bank + set) probed for pc, bank order.
  std::array<std::size_t, kMbtbBanks> candidates(Addr pc) const;

  /// Variant the placement policy would use for this branch.
  unsigned choose_variant(Addr pc, Addr target, BranchKind kind) const;

  struct SlotInfo {
    std::size_t entry = 0;
    unsigned slot = 0;
    unsigned variant = 0;
    KindCode kind = KindCode::Conditional;
    Addr owner = 0;
    std::uint32_t tag = 0;
    /// Raw offset field for compressed variants.
    std::optional<OffsetEncoding> offset;
    /// Stored target for variant 0, decoded target otherwise (owner-relative).
    Addr target = 0;
  };

  /// Every occupied slot, walking the raw entry bits.
  std::vector<SlotInfo> dump() const;
  std::size_t valid_entries() const;
  std::size_t entry_count() const { return entries_.size(); }
  unsigned entry_bits() const { return mbtb_entry_bits(spec_.variant_mode); }
  const MbtbSpec& spec() const { return spec_; }

 private:
  struct Packed {
    std::array<std::uint64_t, 2> words{};

    std::uint64_t get(unsigned pos, unsigned width) const;
    void set(unsigned pos, unsigned width, std::uint64_t value);
  };

  struct Location {
    std::size_t entry;
    unsigned slot;
  };

  unsigned variant_bits() const { return spec_.variant_mode <= 2 ? 1 : 2; }
  unsigned payload_pos() const { return variant_bits() + 2; }

  unsigned variant_of(std::size_t i) const;
  KindCode kind_of(std::size_t i) const;
  std::uint32_t tag_at(std::size_t i, unsigned slot) const;
  std::uint64_t field_at(std::size_t i, unsigned slot) const;
  Addr target0_of(std::size_t i) const;
  bool slot_occupied(std::size_t i, unsigned slot) const;
  bool entry_valid(std::size_t i) const;
  unsigned occupied_count(std::size_t i) const;

  void reset_entry(std::size_t i, unsigned variant, KindCode kind);
  void make_invalid(std::size_t i) { reset_entry(i, 1, KindCode::Conditional); }
  void write_slot(std::size_t i, unsigned slot, Addr pc, Addr target,
                  BranchKind kind);
  void free_slot(Location loc);
  bool fits(unsigned variant, Addr pc, Addr target, BranchKind kind) const;

  std::optional<Location> find(Addr pc) const;
  EvictionReport place(Addr pc, Addr target, BranchKind kind);
  EvictionReport update_at(Location loc, Addr pc, Addr target, BranchKind kind);

  MbtbSpec spec_;
  unsigned index_bits_;
  std::vector<Packed> entries_;
  // Instrumentation: full pc of each slot's owner, outside the bit budget.
  std::vector<std::array<Addr, 8>> owners_;
  Xorshift64Star rng_;
  std::size_t resident_ = 0;
};

}  // namespace btbsim

#endif  // BTBSIM_MBTB_HPP
