#ifndef BTBSIM_IDEAL_BTB_HPP
#define BTBSIM_IDEAL_BTB_HPP

#include <unordered_map>

#include "btbsim/btb.hpp"

namespace btbsim {

/// Unbounded BTB: a branch misses only before its first insertion.
class IdealBtb final : public Btb {
 public:
  LookupResult lookup(Addr pc) override;
  EvictionReport insert(Addr pc, Addr target, BranchKind kind) override;
  std::uint64_t storage_bits() const override { return 0; }
  std::size_t resident_branches() const override { return map_.size(); }
  std::string name() const override { return "ideal"; }

 private:
  struct Entry {
    KindCode kind;
    Addr target;
  };
  std::unordered_map<Addr, Entry> map_;
};

}  // namespace btbsim

#endif  // BTBSIM_IDEAL_BTB_HPP
