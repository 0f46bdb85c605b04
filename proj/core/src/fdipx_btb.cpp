#include "btbsim/fdipx_btb.hpp"

#include "btbsim/offset.hpp"

namespace btbsim {

FdipxBtb::FdipxBtb(const FdipxSpec& spec) : spec_(spec) {
  validate(OrgSpec{spec});
  for (const auto& t : spec_.tables) {
    tables_.emplace_back(BaselineSpec{t.entries / t.ways, t.ways, fdipx_tag_bits(t), 2});
  }
}

std::size_t FdipxBtb::table_for(Addr pc, Addr target, BranchKind kind) const {
  if (kind == BranchKind::Return) return 0;
  for (std::size_t i = 0; i < spec_.tables.size(); ++i) {
    const unsigned w = spec_.tables[i].offset_bits;
    if (w >= kAddrBits || encode_offset(pc, target, w - 1)) return i;
  }
  return spec_.tables.size() - 1;
}

std::optional<std::size_t> FdipxBtb::resident_table(Addr pc) const {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i].contains(pc)) return i;
  }
  return std::nullopt;
}

LookupResult FdipxBtb::lookup(Addr pc) {
  LookupResult result;
  // All tables are probed; the narrowest hit wins.
  for (auto& t : tables_) {
    auto hit = t.lookup(pc);
    if (hit && !result) result = hit;
  }
  return result;
}

EvictionReport FdipxBtb::insert(Addr pc, Addr target, BranchKind kind) {
  const auto dest = table_for(pc, target, kind);
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (i != dest) tables_[i].remove(pc);
  }
  return tables_[dest].insert(pc, target, kind);
}

std::uint64_t FdipxBtb::storage_bits() const { return btbsim::storage_bits(spec_); }

std::size_t FdipxBtb::resident_branches() const {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.resident_branches();
  return n;
}

std::string FdipxBtb::name() const { return describe(spec_); }

}  // namespace btbsim
