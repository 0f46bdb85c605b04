#include "btbsim/btb.hpp"

#include <fmt/format.h>

#include <bit>
#include <stdexcept>

#include "btbsim/fdipx_btb.hpp"
#include "btbsim/ideal_btb.hpp"
#include "btbsim/mbtb.hpp"
#include "btbsim/set_assoc_btb.hpp"
#include "btbsim/skewed_btb.hpp"

namespace btbsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

unsigned ceil_log2(std::size_t n) {
  return n <= 1 ? 0 : static_cast<unsigned>(std::bit_width(n - 1));
}

// Branch-type bits stored with every entry.
constexpr unsigned kKindBits = 2;

}  // namespace

std::uint64_t storage_bits(const OrgSpec& org) {
  return std::visit(
      Overloaded{
          [](const BaselineSpec& s) -> std::uint64_t {
            const unsigned lru = s.lru_bits.value_or(ceil_log2(s.ways));
            return std::uint64_t{s.sets} * s.ways *
                   (s.tag_bits + kAddrBits + kKindBits + lru);
          },
          [](const SkewedSpec& s) -> std::uint64_t {
            return std::uint64_t{s.sets} * s.ways *
                   (s.tag_bits + kAddrBits + kKindBits);
          },
          [](const MbtbSpec& s) -> std::uint64_t {
            return std::uint64_t{kMbtbBanks} * s.sets_per_bank *
                   mbtb_entry_bits(s.variant_mode);
          },
          [](const FdipxSpec& s) -> std::uint64_t {
            std::uint64_t bits = 0;
            for (const auto& t : s.tables) bits += std::uint64_t{t.entries} * t.bits_per_entry;
            return bits;
          },
          [](const IdealSpec&) -> std::uint64_t { return 0; },
      },
      org);
}

std::size_t total_entries(const OrgSpec& org) {
  return std::visit(
      Overloaded{
          [](const BaselineSpec& s) -> std::size_t { return s.sets * s.ways; },
          [](const SkewedSpec& s) -> std::size_t { return s.sets * s.ways; },
          [](const MbtbSpec& s) -> std::size_t {
            return kMbtbBanks * s.sets_per_bank;
          },
          [](const FdipxSpec& s) -> std::size_t {
            std::size_t n = 0;
            for (const auto& t : s.tables) n += t.entries;
            return n;
          },
          [](const IdealSpec&) -> std::size_t { return 0; },
      },
      org);
}

std::string describe(const OrgSpec& org) {
  return std::visit(
      Overloaded{
          [](const BaselineSpec& s) {
            return fmt::format("baseline-{}e-{}w", s.sets * s.ways, s.ways);
          },
          [](const SkewedSpec& s) {
            return fmt::format("skewed-{}e-{}w", s.sets * s.ways, s.ways);
          },
          [](const MbtbSpec& s) {
            std::string out = fmt::format("mbtb-{}e-{}v",
                                          kMbtbBanks * s.sets_per_bank,
                                          s.variant_mode);
            if (!s.skewed) out += "-noskew";
            if (!s.compressed) out += "-nocomp";
            return out;
          },
          [](const FdipxSpec& s) {
            std::size_t n = 0;
            for (const auto& t : s.tables) n += t.entries;
            return fmt::format("fdipx-{}e-{}t", n, s.tables.size());
          },
          [](const IdealSpec&) { return std::string("ideal"); },
      },
      org);
}

void validate(const OrgSpec& org) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  std::visit(
      Overloaded{
          [&](const BaselineSpec& s) {
            if (s.sets == 0 || s.ways == 0) fail("baseline: sets and ways must be positive");
            if (s.tag_bits == 0 || s.tag_bits > 64) fail("baseline: tag_bits must be in 1..64");
          },
          [&](const SkewedSpec& s) {
            if (s.ways == 0) fail("skewed: ways must be positive");
            if (!std::has_single_bit(s.sets)) fail("skewed: sets per way must be a power of two");
            const auto bits = static_cast<unsigned>(std::countr_zero(s.sets));
            if (bits == 0 || 3 * bits > kAddrBits) fail("skewed: set index width out of range");
            if (s.tag_bits == 0 || s.tag_bits > 64) fail("skewed: tag_bits must be in 1..64");
          },
          [&](const MbtbSpec& s) {
            if (!std::has_single_bit(s.sets_per_bank)) {
              fail("mbtb: sets per bank must be a power of two");
            }
            const auto bits = static_cast<unsigned>(std::countr_zero(s.sets_per_bank));
            if (bits == 0 || 3 * bits > kAddrBits) fail("mbtb: set index width out of range");
            if (s.variant_mode < 2 || s.variant_mode > 4) fail("mbtb: variants must be 2, 3 or 4");
          },
          [&](const FdipxSpec& s) {
            if (s.tables.empty()) fail("fdipx: at least one table required");
            for (const auto& t : s.tables) {
              if (t.entries == 0 || t.ways == 0 || t.entries % t.ways != 0) {
                fail("fdipx: table entries must be a positive multiple of ways");
              }
              if (t.offset_bits < 2 || t.offset_bits > kAddrBits) {
                fail("fdipx: offset_bits must be in 2..57");
              }
              if (t.bits_per_entry < t.offset_bits + kFdipxOverheadBits + 1) {
                fail("fdipx: bits_per_entry leaves no tag bits");
              }
            }
          },
          [](const IdealSpec&) {},
      },
      org);
}

std::unique_ptr<Btb> make_btb(const OrgSpec& org, std::uint64_t seed) {
  validate(org);
  return std::visit(
      Overloaded{
          [](const BaselineSpec& s) -> std::unique_ptr<Btb> {
            return std::make_unique<SetAssocBtb>(s);
          },
          [&](const SkewedSpec& s) -> std::unique_ptr<Btb> {
            return std::make_unique<SkewedBtb>(s, seed);
          },
          [&](const MbtbSpec& s) -> std::unique_ptr<Btb> {
            return std::make_unique<Mbtb>(s, seed);
          },
          [](const FdipxSpec& s) -> std::unique_ptr<Btb> {
            return std::make_unique<FdipxBtb>(s);
          },
          [](const IdealSpec&) -> std::unique_ptr<Btb> {
            return std::make_unique<IdealBtb>();
          },
      },
      org);
}

}  // namespace btbsim
