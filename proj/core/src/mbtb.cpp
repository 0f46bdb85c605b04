#include "btbsim/mbtb.hpp"

#include <fmt/format.h>

#include <bit>
#include <stdexcept>

#include "btbsim/skew.hpp"

namespace btbsim {

namespace {

constexpr std::uint64_t low_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

constexpr std::uint64_t empty_field(unsigned field_bits) {
  return pack_offset(kEmptyOffset, field_bits - 1);
}

}  // namespace

std::uint64_t Mbtb::Packed::get(unsigned pos, unsigned width) const {
  const unsigned word = pos / 64;
  const unsigned shift = pos % 64;
  std::uint64_t value = words[word] >> shift;
  if (shift + width > 64) value |= words[word + 1] << (64 - shift);
  return value & low_mask(width);
}

void Mbtb::Packed::set(unsigned pos, unsigned width, std::uint64_t value) {
  value &= low_mask(width);
  const unsigned word = pos / 64;
  const unsigned shift = pos % 64;
  words[word] &= ~(low_mask(width) << shift);
  words[word] |= value << shift;
  if (shift + width > 64) {
    const unsigned spill = shift + width - 64;
    words[word + 1] &= ~low_mask(spill);
    words[word + 1] |= value >> (64 - shift);
  }
}

Mbtb::Mbtb(const MbtbSpec& spec, std::uint64_t seed)
    : spec_(spec),
      index_bits_(static_cast<unsigned>(std::countr_zero(spec.sets_per_bank))),
      entries_(kMbtbBanks * spec.sets_per_bank),
      owners_(entries_.size()),
      rng_(seed) {
  validate(OrgSpec{spec});
  for (std::size_t i = 0; i < entries_.size(); ++i) make_invalid(i);
}

unsigned Mbtb::variant_of(std::size_t i) const {
  return static_cast<unsigned>(entries_[i].get(0, variant_bits()));
}

KindCode Mbtb::kind_of(std::size_t i) const {
  return static_cast<KindCode>(entries_[i].get(variant_bits(), 2));
}

std::uint32_t Mbtb::tag_at(std::size_t i, unsigned slot) const {
  const auto& f = kVariantFormats[variant_of(i)];
  return static_cast<std::uint32_t>(
      entries_[i].get(payload_pos() + slot * f.tag_bits, f.tag_bits));
}

std::uint64_t Mbtb::field_at(std::size_t i, unsigned slot) const {
  const auto& f = kVariantFormats[variant_of(i)];
  return entries_[i].get(payload_pos() + 56 + slot * f.field_bits,
                         f.field_bits);
}

Addr Mbtb::target0_of(std::size_t i) const {
  return entries_[i].get(payload_pos() + 28, kAddrBits);
}

bool Mbtb::slot_occupied(std::size_t i, unsigned slot) const {
  const unsigned v = variant_of(i);
  if (v == 0) return slot == 0;
  return field_at(i, slot) != empty_field(kVariantFormats[v].field_bits);
}

bool Mbtb::entry_valid(std::size_t i) const {
  const unsigned v = variant_of(i);
  if (v == 0) return true;
  for (unsigned s = 0; s < kVariantFormats[v].slots; ++s) {
    if (slot_occupied(i, s)) return true;
  }
  return false;
}

unsigned Mbtb::occupied_count(std::size_t i) const {
  const unsigned v = variant_of(i);
  unsigned n = 0;
  for (unsigned s = 0; s < kVariantFormats[v].slots; ++s) {
    n += slot_occupied(i, s) ? 1 : 0;
  }
  return n;
}

void Mbtb::reset_entry(std::size_t i, unsigned variant, KindCode kind) {
  auto& e = entries_[i];
  e.words = {};
  e.set(0, variant_bits(), variant);
  e.set(variant_bits(), 2, static_cast<std::uint64_t>(kind));
  const auto& f = kVariantFormats[variant];
  if (variant != 0) {
    for (unsigned s = 0; s < f.slots; ++s) {
      e.set(payload_pos() + 56 + s * f.field_bits, f.field_bits,
            empty_field(f.field_bits));
    }
  }
  owners_[i].fill(0);
}

void Mbtb::write_slot(std::size_t i, unsigned slot, Addr pc, Addr target,
                      BranchKind kind) {
  auto& e = entries_[i];
  const unsigned v = variant_of(i);
  const auto& f = kVariantFormats[v];
  const auto tag28 = tag_lower28(pc);
  e.set(variant_bits(), 2, static_cast<std::uint64_t>(kind_code(kind)));
  if (v == 0) {
    e.set(payload_pos(), 28, tag28);
    e.set(payload_pos() + 28, 60, target & kAddrMask);
  } else {
    OffsetEncoding enc{};
    if (kind != BranchKind::Return) {
      enc = *encode_offset(pc, target, f.offset_width());
    }
    e.set(payload_pos() + slot * f.tag_bits, f.tag_bits,
          fold_tag(tag28, f.tag_bits));
    e.set(payload_pos() + 56 + slot * f.field_bits, f.field_bits,
          pack_offset(enc, f.offset_width()));
  }
  owners_[i][slot] = pc;
}

void Mbtb::free_slot(Location loc) {
  const unsigned v = variant_of(loc.entry);
  if (v == 0 || occupied_count(loc.entry) == 1) {
    make_invalid(loc.entry);
  } else {
    const auto& f = kVariantFormats[v];
    auto& e = entries_[loc.entry];
    e.set(payload_pos() + loc.slot * f.tag_bits, f.tag_bits, 0);
    e.set(payload_pos() + 56 + loc.slot * f.field_bits, f.field_bits,
          empty_field(f.field_bits));
    owners_[loc.entry][loc.slot] = 0;
  }
  --resident_;
}

bool Mbtb::fits(unsigned variant, Addr pc, Addr target, BranchKind kind) const {
  if (variant == 0 || kind == BranchKind::Return) return true;
  return encode_offset(pc, target, kVariantFormats[variant].offset_width())
      .has_value();
}

unsigned Mbtb::choose_variant(Addr pc, Addr target, BranchKind kind) const {
  if (!spec_.compressed) return 0;
  const unsigned top = spec_.variant_mode - 1;
  // Returns take the densest form; the RAS supplies their target.
  if (kind == BranchKind::Return) return top;
  for (unsigned v = top; v >= 1; --v) {
    if (fits(v, pc, target, kind)) return v;
  }
  return 0;
}

std::array<std::size_t, kMbtbBanks> Mbtb::candidates(Addr pc) const {
  std::array<std::size_t, kMbtbBanks> out{};
  const Addr set_mask = spec_.sets_per_bank - 1;
  for (unsigned b = 0; b < kMbtbBanks; ++b) {
    const std::size_t set =
        spec_.skewed ? skew_index(pc, b, index_bits_) : (pc & set_mask);
    out[b] = b * spec_.sets_per_bank + set;
  }
  return out;
}

std::optional<Mbtb::Location> Mbtb::find(Addr pc) const {
  const auto tag28 = tag_lower28(pc);
  for (const auto i : candidates(pc)) {
    const unsigned v = variant_of(i);
    const auto& f = kVariantFormats[v];
    if (v == 0) {
      if (tag_at(i, 0) == tag28) return Location{i, 0};
      continue;
    }
    const auto want = fold_tag(tag28, f.tag_bits);
    for (unsigned s = 0; s < f.slots; ++s) {
      if (slot_occupied(i, s) && tag_at(i, s) == want) return Location{i, s};
    }
  }
  return std::nullopt;
}

LookupResult Mbtb::lookup(Addr pc) {
  const auto loc = find(pc);
  if (!loc) return std::nullopt;
  const auto i = loc->entry;
  const unsigned v = variant_of(i);
  BtbHit hit;
  hit.kind = kind_of(i);
  hit.is_return = hit.kind == KindCode::Return;
  hit.alias = owners_[i][loc->slot] != pc;
  if (v == 0) {
    hit.target = target0_of(i);
  } else if (!hit.is_return) {
    hit.target = decode_target(
        pc, unpack_offset(field_at(i, loc->slot),
                          kVariantFormats[v].offset_width()));
  }
  return hit;
}

EvictionReport Mbtb::place(Addr pc, Addr target, BranchKind kind) {
  const unsigned v = choose_variant(pc, target, kind);
  const KindCode code = kind_code(kind);
  const auto cands = candidates(pc);

  // Share a partially filled entry of the same variant and kind.
  if (v != 0) {
    for (const auto i : cands) {
      if (variant_of(i) != v || kind_of(i) != code || !entry_valid(i)) continue;
      for (unsigned s = 0; s < kVariantFormats[v].slots; ++s) {
        if (!slot_occupied(i, s)) {
          write_slot(i, s, pc, target, kind);
          ++resident_;
          return {};
        }
      }
    }
  }

  EvictionReport report;
  std::size_t chosen = cands[0];
  bool found_invalid = false;
  for (const auto i : cands) {
    if (!entry_valid(i)) {
      chosen = i;
      found_invalid = true;
      break;
    }
  }
  if (!found_invalid) {
    chosen = cands[rng_.next_below(kMbtbBanks)];
    const unsigned victim_variant = variant_of(chosen);
    for (unsigned s = 0; s < kVariantFormats[victim_variant].slots; ++s) {
      if (slot_occupied(chosen, s)) report.add(owners_[chosen][s]);
    }
    resident_ -= report.count();
  }
  reset_entry(chosen, v, code);
  write_slot(chosen, 0, pc, target, kind);
  ++resident_;
  return report;
}

EvictionReport Mbtb::update_at(Location loc, Addr pc, Addr target,
                               BranchKind kind) {
  const unsigned v = variant_of(loc.entry);
  const bool sole = occupied_count(loc.entry) == 1;
  if ((kind_of(loc.entry) == kind_code(kind) || sole) &&
      fits(v, pc, target, kind)) {
    write_slot(loc.entry, loc.slot, pc, target, kind);
    return {};
  }
  free_slot(loc);
  return place(pc, target, kind);
}

EvictionReport Mbtb::insert(Addr pc, Addr target, BranchKind kind) {
  if (const auto loc = find(pc)) return update_at(*loc, pc, target, kind);
  return place(pc, target, kind);
}

EvictionReport Mbtb::update_target(Addr pc, Addr new_target) {
  const auto loc = find(pc);
  if (!loc || kind_of(loc->entry) != KindCode::Indirect) {
    throw std::logic_error(
        fmt::format("update_target: {:#x} is not a resident indirect branch", pc));
  }
  return update_at(*loc, pc, new_target, BranchKind::IndirectJump);
}

std::vector<Mbtb::SlotInfo> Mbtb::dump() const {
  std::vector<SlotInfo> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const unsigned v = variant_of(i);
    const auto& f = kVariantFormats[v];
    for (unsigned s = 0; s < f.slots; ++s) {
      if (!slot_occupied(i, s)) continue;
      SlotInfo info;
      info.entry = i;
      info.slot = s;
      info.variant = v;
      info.kind = kind_of(i);
      info.owner = owners_[i][s];
      info.tag = tag_at(i, s);
      if (v == 0) {
        info.target = target0_of(i);
      } else {
        info.offset = unpack_offset(field_at(i, s), f.offset_width());
        if (info.kind != KindCode::Return) {
          info.target = decode_target(info.owner, *info.offset);
        }
      }
      out.push_back(info);
    }
  }
  return out;
}

std::size_t Mbtb::valid_entries() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) n += entry_valid(i) ? 1 : 0;
  return n;
}

std::uint64_t Mbtb::storage_bits() const { return btbsim::storage_bits(spec_); }

std::string Mbtb::name() const { return describe(spec_); }

}  // namespace btbsim
