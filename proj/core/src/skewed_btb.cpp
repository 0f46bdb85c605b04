#include "btbsim/skewed_btb.hpp"

#include <fmt/format.h>

#include <bit>
#include <stdexcept>

#include "btbsim/skew.hpp"

namespace btbsim {

SkewedBtb::SkewedBtb(const SkewedSpec& spec, std::uint64_t seed)
    : spec_(spec),
      index_bits_(static_cast<unsigned>(std::countr_zero(spec.sets))),
      tag_mask_((std::uint64_t{1} << spec.tag_bits) - 1),
      slots_(spec.sets * spec.ways),
      rng_(seed) {
  validate(OrgSpec{spec});
}

std::size_t SkewedBtb::slot_index(Addr pc, std::size_t way) const {
  return way * spec_.sets +
         skew_index(pc, static_cast<unsigned>(way), index_bits_);
}

std::optional<std::size_t> SkewedBtb::find(Addr pc) const {
  const auto tag = tag_of(pc);
  for (std::size_t w = 0; w < spec_.ways; ++w) {
    const auto i = slot_index(pc, w);
    if (slots_[i].valid && slots_[i].tag == tag) return i;
  }
  return std::nullopt;
}

LookupResult SkewedBtb::lookup(Addr pc) {
  const auto i = find(pc);
  if (!i) return std::nullopt;
  const auto& s = slots_[*i];
  return BtbHit{s.kind, s.target, s.kind == KindCode::Return, s.owner != pc};
}

EvictionReport SkewedBtb::insert(Addr pc, Addr target, BranchKind kind) {
  EvictionReport report;
  auto slot = find(pc);
  if (!slot) {
    for (std::size_t w = 0; w < spec_.ways && !slot; ++w) {
      const auto i = slot_index(pc, w);
      if (!slots_[i].valid) slot = i;
    }
    if (slot) {
      ++resident_;
    } else {
      slot = slot_index(pc, rng_.next_below(spec_.ways));
      report.add(slots_[*slot].owner);
    }
  }
  slots_[*slot] = Slot{true, kind_code(kind), tag_of(pc), target, pc};
  return report;
}

std::uint64_t SkewedBtb::storage_bits() const {
  return btbsim::storage_bits(spec_);
}

std::string SkewedBtb::name() const {
  return fmt::format("skewed-{}x{}", spec_.sets, spec_.ways);
}

}  // namespace btbsim
