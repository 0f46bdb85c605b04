#include "btbsim/ideal_btb.hpp"

namespace btbsim {

LookupResult IdealBtb::lookup(Addr pc) {
  const auto it = map_.find(pc);
  if (it == map_.end()) return std::nullopt;
  return BtbHit{it->second.kind, it->second.target,
                it->second.kind == KindCode::Return, false};
}

EvictionReport IdealBtb::insert(Addr pc, Addr target, BranchKind kind) {
  map_.insert_or_assign(pc, Entry{kind_code(kind), target});
  return {};
}

}  // namespace btbsim
