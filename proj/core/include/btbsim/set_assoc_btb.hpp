#ifndef BTBSIM_SET_ASSOC_BTB_HPP
#define BTBSIM_SET_ASSOC_BTB_HPP

#include <optional>
#include <vector>

#include "btbsim/btb.hpp"

namespace btbsim {

/// Set-associative BTB with true LRU replacement and full stored targets.
/// set = pc mod sets, tag = the next `tag_bits` bits above the index.
class SetAssocBtb final : public Btb {
 public:
  explicit SetAssocBtb(const BaselineSpec& spec);

  LookupResult lookup(Addr pc) override;
  EvictionReport insert(Addr pc, Addr target, BranchKind kind) override;
  std::uint64_t storage_bits() const override;
  std::size_t resident_branches() const override { return resident_; }
  std::string name() const override;

  /// Drops `pc` if resident. Returns whether it was.
  bool remove(Addr pc);
  /// Resident without touching recency.
  bool contains(Addr pc) const { return find(pc).has_value(); }

  std::size_t sets() const { return spec_.sets; }
  std::size_t ways() const { return spec_.ways; }

 private:
  struct Way {
    bool valid = false;
    KindCode kind = KindCode::Conditional;
    std::uint64_t tag = 0;
    Addr target = 0;
    Addr owner = 0;
    std::uint64_t last_use = 0;
  };

  std::size_t set_of(Addr pc) const { return pc % spec_.sets; }
  std::uint64_t tag_of(Addr pc) const { return (pc / spec_.sets) & tag_mask_; }
  std::optional<std::size_t> find(Addr pc) const;

  BaselineSpec spec_;
  std::uint64_t tag_mask_;
  std::vector<Way> ways_;
  std::uint64_t clock_ = 0;
  std::size_t resident_ = 0;
};

}  // namespace btbsim

#endif  // BTBSIM_SET_ASSOC_BTB_HPP
