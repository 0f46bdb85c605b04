#ifndef BTBSIM_SKEWED_BTB_HPP
#define BTBSIM_SKEWED_BTB_HPP

#include <optional>
#include <vector>

#include "btbsim/btb.hpp"
#include "btbsim/rng.hpp"

namespace btbsim {

/// Skewed-associative BTB: way w indexes its own bank with skew_index(pc, w),
/// stores a 32-bit tag and a full target, and replaces at random.
class SkewedBtb final : public Btb {
 public:
  SkewedBtb(const SkewedSpec& spec, std::uint64_t seed);

  LookupResult lookup(Addr pc) override;
  EvictionReport insert(Addr pc, Addr target, BranchKind kind) override;
  std::uint64_t storage_bits() const override;
  std::size_t resident_branches() const override { return resident_; }
  std::string name() const override;

 private:
  struct Slot {
    bool valid = false;
    KindCode kind = KindCode::Conditional;
    std::uint64_t tag = 0;
    Addr target = 0;
    Addr owner = 0;
  };

  std::size_t slot_index(Addr pc, std::size_t way) const;
  std::uint64_t tag_of(Addr pc) const { return (pc >> index_bits_) & tag_mask_; }
  std::optional<std::size_t> find(Addr pc) const;

  SkewedSpec spec_;
  unsigned index_bits_;
  std::uint64_t tag_mask_;
  std::vector<Slot> slots_;
  Xorshift64Star rng_;
  std::size_t resident_ = 0;
};

}  // namespace btbsim

#endif  // BTBSIM_SKEWED_BTB_HPP
