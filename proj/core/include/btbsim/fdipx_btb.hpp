#ifndef BTBSIM_FDIPX_BTB_HPP
#define BTBSIM_FDIPX_BTB_HPP

#include <vector>

#include "btbsim/btb.hpp"
#include "btbsim/set_assoc_btb.hpp"

namespace btbsim {

/// Per-entry bits outside the tag and offset field: 2 kind bits + 2 LRU bits.
inline constexpr unsigned kFdipxOverheadBits = 4;

/// Tag width of one FDIP-X table.
constexpr unsigned fdipx_tag_bits(const FdipxTable& t) {
  return t.bits_per_entry - t.offset_bits - kFdipxOverheadBits;
}

/// Multi-offset BTB: one LRU set-associative table per offset class. A branch
/// lives in the narrowest table whose offset field holds its target offset
/// (field width includes a direction bit). Returns go to the narrowest table.
class FdipxBtb final : public Btb {
 public:
  explicit FdipxBtb(const FdipxSpec& spec);

  LookupResult lookup(Addr pc) override;
  EvictionReport insert(Addr pc, Addr target, BranchKind kind) override;
  std::uint64_t storage_bits() const override;
  std::size_t resident_branches() const override;
  std::string name() const override;

  /// Index of the table the branch would be placed in.
  std::size_t table_for(Addr pc, Addr target, BranchKind kind) const;
  /// Table currently holding pc, if any.
  std::optional<std::size_t> resident_table(Addr pc) const;

 private:
  FdipxSpec spec_;
  std::vector<SetAssocBtb> tables_;
};

}  // namespace btbsim

#endif  // BTBSIM_FDIPX_BTB_HPP
