#include <btbsim/mbtb.hpp>
#include <btbsim/skew.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "unit/generators.hpp"

namespace btbsim {
namespace {

constexpr BranchKind kCond = BranchKind::ConditionalDirect;
constexpr BranchKind kJump = BranchKind::UnconditionalDirectJump;
constexpr BranchKind kIndirect = BranchKind::IndirectJump;

Mbtb make(unsigned mode = 2, std::size_t sets = 1024, bool skewed = true,
          bool compressed = true, std::uint64_t seed = 1) {
  return Mbtb(MbtbSpec{sets, mode, skewed, compressed}, seed);
}

TEST(Mbtb, EmptyMissesAndInsertHits) {
  auto m = make();
  EXPECT_FALSE(m.lookup(0x1000));
  EXPECT_EQ(m.insert(0x1000, 0x1010, kCond).count(), 0u);
  const auto hit = m.lookup(0x1000);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->kind, KindCode::Conditional);
  EXPECT_EQ(hit->target, 0x1010u);
  EXPECT_EQ(m.valid_entries(), 1u);
}

TEST(Mbtb, SameKindShortOffsetsShareOneEntry) {
  auto m = make();
  const Addr a = 0x12345;
  // Flipping bit 0 of both x1 and x2 keeps the bank-0 index.
  const Addr b = a ^ 0x1 ^ (Addr{1} << 10);
  ASSERT_EQ(m.candidates(a)[0], m.candidates(b)[0]);
  m.insert(a, a + 0x100, kCond);
  EXPECT_EQ(m.insert(b, b - 0x7FFF, kCond).count(), 0u);
  EXPECT_EQ(m.lookup(a)->target, a + 0x100);
  EXPECT_EQ(m.lookup(b)->target, b - 0x7FFF);
  EXPECT_EQ(m.valid_entries(), 1u);
  EXPECT_EQ(m.resident_branches(), 2u);
}

TEST(Mbtb, DifferentKindsNeverShare) {
  auto m = make();
  const Addr a = 0x12345;
  const Addr b = a ^ 0x1 ^ (Addr{1} << 10);
  m.insert(a, a + 0x100, kCond);
  m.insert(b, b + 0x100, kJump);
  EXPECT_EQ(m.valid_entries(), 2u);
  EXPECT_EQ(m.lookup(a)->kind, KindCode::Conditional);
  EXPECT_EQ(m.lookup(b)->kind, KindCode::Direct);
}

TEST(Mbtb, OffsetOfTwoToFifteenNeedsFullEntry) {
  auto m = make();
  EXPECT_EQ(m.choose_variant(0x10000, 0x10000 + 0x7FFF, kCond), 1u);
  EXPECT_EQ(m.choose_variant(0x10000, 0x10000 + 0x8000, kCond), 0u);
  EXPECT_EQ(m.choose_variant(0x10000, 0x3000, BranchKind::Return), 1u);
  EXPECT_EQ(make(4).choose_variant(0x10000, 0x3000, BranchKind::Return), 3u);
  EXPECT_EQ(make(4).choose_variant(0x10000, 0x10005, kCond), 3u);
  EXPECT_EQ(make(4).choose_variant(0x10000, 0x10008, kCond), 2u);
  EXPECT_EQ(make(4).choose_variant(0x10000, 0x10080, kCond), 1u);
  EXPECT_EQ(make(2, 1024, true, false).choose_variant(0x10000, 0x10001, kCond), 0u);
}

TEST(Mbtb, ReturnsHitAsReturns) {
  auto m = make(3);
  m.insert(0x8000, 0x123456, BranchKind::Return);
  const auto hit = m.lookup(0x8000);
  ASSERT_TRUE(hit);
  EXPECT_TRUE(hit->is_return);
  EXPECT_EQ(m.dump().front().variant, 2u);
}

TEST(Mbtb, FifthFullyConflictingBranchEvictsOne) {
  // With 256 sets per bank the index reads bits [0, 24); pcs that differ
  // only in bits 24..27 share all four candidates yet keep distinct tags.
  auto m = make(2, 256);
  std::vector<Addr> pcs;
  const Addr base = 0x3A5C71;
  for (Addr hi = 0; hi < 16 && pcs.size() < 5; ++hi) {
    const Addr pc = base | (hi << 24);
    if (m.candidates(pc) == m.candidates(base)) pcs.push_back(pc);
  }
  ASSERT_EQ(pcs.size(), 5u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(m.insert(pcs[i], pcs[i] + (Addr{1} << 30), kJump).count(), 0u);
  }
  const auto report = m.insert(pcs[4], pcs[4] + (Addr{1} << 30), kJump);
  ASSERT_EQ(report.count(), 1u);
  EXPECT_NE(report.branches()[0], pcs[4]);
  EXPECT_FALSE(m.lookup(report.branches()[0]));
  EXPECT_EQ(m.resident_branches(), 4u);
}

TEST(Mbtb, EvictingAPackedEntryReportsEveryOccupant) {
  auto m = make(3, 256);
  const Addr base = 0x3A5C70;
  std::vector<Addr> packed;
  for (Addr lo = 0; lo < 4; ++lo) {
    // Keep the bank-0 index: flip the same bits in x1 and x2.
    packed.push_back(base ^ lo ^ (lo << 8));
  }
  for (auto pc : packed) m.insert(pc, pc + 0x10, kCond);
  ASSERT_EQ(m.valid_entries(), 1u);
  // Fill the other three candidates of base with wide branches, then force
  // an eviction over and over until the packed entry is the victim.
  bool saw_four = false;
  for (Addr hi = 1; hi < 16 && !saw_four; ++hi) {
    const Addr pc = base | (hi << 24);
    if (m.candidates(pc) != m.candidates(base)) continue;
    const auto report = m.insert(pc, pc + (Addr{1} << 30), kJump);
    saw_four = report.count() == 4;
    if (saw_four) {
      std::set<Addr> got(report.branches().begin(), report.branches().end());
      EXPECT_EQ(got, std::set<Addr>(packed.begin(), packed.end()));
    }
  }
  EXPECT_TRUE(saw_four);
}

TEST(Mbtb, UpdateTargetInPlace) {
  auto m = make();
  m.insert(0x1000, 0x1010, kIndirect);
  EXPECT_EQ(m.update_target(0x1000, 0x1020).count(), 0u);
  EXPECT_EQ(m.lookup(0x1000)->target, 0x1020u);
  EXPECT_EQ(m.valid_entries(), 1u);
  EXPECT_EQ(m.dump().front().variant, 1u);
}

TEST(Mbtb, UpdateTargetWithSameTargetChangesNothing) {
  auto m = make();
  m.insert(0x1000, 0x1010, kIndirect);
  m.insert(0x1000 ^ 0x1 ^ (Addr{1} << 10), 0x1100, kIndirect);
  const auto before = m.dump();
  m.update_target(0x1000, 0x1010);
  const auto after = m.dump();
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].entry, after[i].entry);
    EXPECT_EQ(before[i].slot, after[i].slot);
    EXPECT_EQ(before[i].owner, after[i].owner);
    EXPECT_EQ(before[i].target, after[i].target);
  }
}

TEST(Mbtb, UpdateTargetBeyondVariantKeepsPartner) {
  auto m = make();
  const Addr a = 0x1000;
  const Addr b = a ^ 0x1 ^ (Addr{1} << 10);
  m.insert(a, a + 0x10, kIndirect);
  m.insert(b, b + 0x20, kIndirect);
  ASSERT_EQ(m.valid_entries(), 1u);
  m.update_target(a, a + (Addr{1} << 20));
  EXPECT_EQ(m.lookup(b)->target, b + 0x20);
  EXPECT_EQ(m.lookup(a)->target, a + (Addr{1} << 20));
  std::map<Addr, unsigned> variant;
  for (const auto& s : m.dump()) variant[s.owner] = s.variant;
  EXPECT_EQ(variant[a], 0u);
  EXPECT_EQ(variant[b], 1u);
}

TEST(Mbtb, UpdateTargetRequiresResidentIndirect) {
  auto m = make();
  EXPECT_THROW(m.update_target(0x1000, 0x1010), std::logic_error);
  m.insert(0x1000, 0x1010, kCond);
  EXPECT_THROW(m.update_target(0x1000, 0x1020), std::logic_error);
}

TEST(Mbtb, UpperBitAliasIsAFalseHit) {
  auto m = make();
  const Addr pc = 0x1000;
  const Addr twin = pc | (Addr{1} << 40);
  ASSERT_EQ(tag_lower28(pc), tag_lower28(twin));
  m.insert(pc, pc + 0x40, kCond);
  const auto hit = m.lookup(twin);
  ASSERT_TRUE(hit);
  EXPECT_TRUE(hit->alias);
  EXPECT_EQ(hit->target, twin + 0x40);
  EXPECT_FALSE(m.lookup(pc)->alias);
}

TEST(Mbtb, ModuloIndexingUsesOneSetInEveryBank) {
  auto m = make(2, 1024, false, true);
  const auto c = m.candidates(0x12345);
  for (unsigned bank = 0; bank < 4; ++bank) EXPECT_EQ(c[bank], bank * 1024 + (0x12345 % 1024));
}

TEST(Mbtb, StoredFieldsRespectTheirVariant) {
  for (unsigned mode : {2u, 3u, 4u}) {
    auto m = make(mode, 256, true, true, mode);
    Xorshift64Star rng(40 + mode);
    const auto trace = testgen::reuse_trace(rng, 4000, 20'000);
    for (const auto& e : trace) {
      if (e.taken) m.insert(e.pc, e.target, e.kind);
    }
    const auto slots = m.dump();
    EXPECT_EQ(slots.size(), m.resident_branches());
    std::map<std::size_t, KindCode> entry_kind;
    for (const auto& s : slots) {
      const auto [it, fresh] = entry_kind.emplace(s.entry, s.kind);
      EXPECT_EQ(it->second, s.kind);
      EXPECT_LT(s.slot, kVariantFormats[s.variant].slots);
      EXPECT_LE(s.variant, mode - 1);
      if (s.variant == 0) {
        EXPECT_FALSE(s.offset);
        continue;
      }
      ASSERT_TRUE(s.offset);
      EXPECT_FALSE(s.offset->is_empty());
      EXPECT_LT(s.offset->magnitude, Addr{1} << kVariantFormats[s.variant].offset_width());
      if (s.variant == 1) {
        EXPECT_LT(s.offset->magnitude, Addr{1} << 15);
      }
      EXPECT_TRUE(m.lookup(s.owner));
    }
  }
}

}  // namespace
}  // namespace btbsim
