#include <btbsim/btb.hpp>

#include <gtest/gtest.h>

#include "reference/equivalence.hpp"

namespace btbsim {
namespace {

constexpr std::size_t kEvents = 100'000;

TEST(ReferenceEquivalence, Baseline) {
  const auto trace = ref::stress_trace(51, kEvents);
  for (std::size_t ways : {2u, 4u}) {
    const BaselineSpec spec{1024, ways, 32, std::nullopt};
    auto impl = make_btb(spec, 1);
    ref::Baseline oracle(1024, ways, 32);
    const auto s = ref::compare_streams(*impl, oracle, trace);
    EXPECT_FALSE(s.mismatch) << describe(spec) << ": " << s.mismatch.value_or("");
    EXPECT_GT(s.evictions, 1000u);
  }
}

TEST(ReferenceEquivalence, Skewed) {
  const auto trace = ref::stress_trace(52, kEvents);
  const SkewedSpec spec{1024, 4, 32};
  auto impl = make_btb(spec, 77);
  ref::Skewed oracle(1024, 4, 77);
  const auto s = ref::compare_streams(*impl, oracle, trace);
  EXPECT_FALSE(s.mismatch) << s.mismatch.value_or("");
  EXPECT_GT(s.evictions, 1000u);
}

TEST(ReferenceEquivalence, Fdipx) {
  const auto trace = ref::stress_trace(53, kEvents);
  FdipxSpec spec;
  for (auto& t : spec.tables) t.entries /= 4;
  auto impl = make_btb(spec, 1);
  ref::Fdipx oracle(spec);
  const auto s = ref::compare_streams(*impl, oracle, trace);
  EXPECT_FALSE(s.mismatch) << s.mismatch.value_or("");
  EXPECT_GT(s.evictions, 1000u);
}

TEST(ReferenceEquivalence, MbtbEveryModeAndFlag) {
  std::uint64_t seed = 54;
  for (unsigned mode : {2u, 3u, 4u}) {
    for (bool skewed : {true, false}) {
      for (bool compressed : {true, false}) {
        const auto trace = ref::stress_trace(seed, kEvents);
        const MbtbSpec spec{512, mode, skewed, compressed};
        auto impl = make_btb(spec, seed);
        ref::Mbtb oracle(512, mode, skewed, compressed, seed);
        const auto s = ref::compare_streams(*impl, oracle, trace);
        EXPECT_FALSE(s.mismatch) << describe(spec) << ": " << s.mismatch.value_or("");
        EXPECT_GT(s.evictions, 1000u) << describe(spec);
        EXPECT_EQ(impl->resident_branches(), oracle.resident()) << describe(spec);
        ++seed;
      }
    }
  }
}

}  // namespace
}  // namespace btbsim
