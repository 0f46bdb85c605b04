#include "btbsim/set_assoc_btb.hpp"

#include <fmt/format.h>

#include <bit>
#include <stdexcept>

namespace btbsim {

SetAssocBtb::SetAssocBtb(const BaselineSpec& spec)
    : spec_(spec),
      tag_mask_(spec.tag_bits >= 64 ? ~std::uint64_t{0}
                                    : (std::uint64_t{1} << spec.tag_bits) - 1),
      ways_(spec.sets * spec.ways) {
  if (spec.sets == 0 || spec.ways == 0) {
    throw std::invalid_argument("set-associative BTB needs sets and ways > 0");
  }
}

std::optional<std::size_t> SetAssocBtb::find(Addr pc) const {
  const std::size_t base = set_of(pc) * spec_.ways;
  const auto tag = tag_of(pc);
  for (std::size_t w = 0; w < spec_.ways; ++w) {
    const auto& way = ways_[base + w];
    if (way.valid && way.tag == tag) return base + w;
  }
  return std::nullopt;
}

LookupResult SetAssocBtb::lookup(Addr pc) {
  const auto slot = find(pc);
  if (!slot) return std::nullopt;
  auto& way = ways_[*slot];
  way.last_use = ++clock_;
  return BtbHit{way.kind, way.target, way.kind == KindCode::Return,
                way.owner != pc};
}

EvictionReport SetAssocBtb::insert(Addr pc, Addr target, BranchKind kind) {
  EvictionReport report;
  std::size_t slot = 0;
  if (auto hit = find(pc)) {
    slot = *hit;
  } else {
    const std::size_t base = set_of(pc) * spec_.ways;
    slot = base;
    bool found_invalid = false;
    for (std::size_t w = 0; w < spec_.ways; ++w) {
      if (!ways_[base + w].valid) {
        slot = base + w;
        found_invalid = true;
        break;
      }
      if (ways_[base + w].last_use < ways_[slot].last_use) slot = base + w;
    }
    if (found_invalid) {
      ++resident_;
    } else {
      report.add(ways_[slot].owner);
    }
    ways_[slot].valid = true;
    ways_[slot].tag = tag_of(pc);
  }
  auto& way = ways_[slot];
  way.kind = kind_code(kind);
  way.target = target;
  way.owner = pc;
  way.last_use = ++clock_;
  return report;
}

bool SetAssocBtb::remove(Addr pc) {
  const auto slot = find(pc);
  if (!slot) return false;
  ways_[*slot] = Way{};
  --resident_;
  return true;
}

std::uint64_t SetAssocBtb::storage_bits() const {
  return btbsim::storage_bits(spec_);
}

std::string SetAssocBtb::name() const {
  return fmt::format("baseline-{}x{}", spec_.sets, spec_.ways);
}

}  // namespace btbsim
