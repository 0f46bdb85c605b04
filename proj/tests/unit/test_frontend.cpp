#include <btbsim/frontend.hpp>
#include <btbsim/synthetic.hpp>

#include <gtest/gtest.h>

#include <unordered_set>

#include "unit/generators.hpp"

namespace btbsim {
namespace {

const TraceEvent kTakenCond{0x1000, 4, BranchKind::ConditionalDirect, true, 0x2000};

FrontendConfig with_l2(const OrgSpec& org, unsigned latency = 2) {
  FrontendConfig c;
  c.l2btb = BtbSpec{org, latency};
  return c;
}

std::uint64_t window_instructions(std::span<const TraceEvent> trace, std::size_t begin,
                                  std::size_t end) {
  std::uint64_t n = 0;
  for (std::size_t i = begin; i < end; ++i) n += trace[i].gap + 1;
  return n;
}

TEST(FrontendGolden, EmptyQueueConditionalMiss) {
  const std::vector<TraceEvent> trace{kTakenCond};
  FrontendSim sim(FrontendConfig{}, trace);
  sim.enable_resolution_log();
  const auto r = sim.run(0, 1);
  ASSERT_EQ(sim.resolution_log().size(), 1u);
  const auto& rec = sim.resolution_log()[0];
  EXPECT_EQ(rec.stage, ResolveStage::Decode);
  EXPECT_EQ(rec.fetch(), 5u);
  EXPECT_EQ(rec.decode(), 1u);
  EXPECT_EQ(rec.execute(), 0u);
  EXPECT_EQ(rec.total(), 6u);
  EXPECT_EQ(r.cycles, 8u);
  EXPECT_EQ(r.retired, 5u);
  EXPECT_EQ(r.starved_cycles, 7u);
  EXPECT_EQ(r.l2btb_misses, 1u);
}

TEST(FrontendGolden, FullDecodeQueueConditionalMiss) {
  const std::vector<TraceEvent> trace{kTakenCond};
  FrontendSim sim(FrontendConfig{}, trace);
  sim.enable_resolution_log();
  sim.prefill_decode_queue(60);
  const auto r = sim.run(0, 1);
  ASSERT_EQ(sim.resolution_log().size(), 1u);
  const auto& rec = sim.resolution_log()[0];
  EXPECT_EQ(rec.fetch(), 5u);
  EXPECT_EQ(rec.decode(), 5u);
  EXPECT_EQ(rec.execute(), 0u);
  EXPECT_EQ(rec.total(), 10u);
  EXPECT_EQ(r.cycles, 12u);
  EXPECT_EQ(r.retired, 5u);
}

TEST(FrontendGolden, IndirectMissResolvesAtExecute) {
  const std::vector<TraceEvent> trace{{0x1000, 4, BranchKind::IndirectJump, true, 0x2000}};
  FrontendSim sim(FrontendConfig{}, trace);
  sim.enable_resolution_log();
  const auto r = sim.run(0, 1);
  ASSERT_EQ(sim.resolution_log().size(), 1u);
  const auto& rec = sim.resolution_log()[0];
  EXPECT_EQ(rec.stage, ResolveStage::Execute);
  EXPECT_EQ(rec.fetch(), 5u);
  EXPECT_EQ(rec.decode(), 1u);
  EXPECT_EQ(rec.execute(), 12u);
  EXPECT_EQ(rec.total(), 18u);
  EXPECT_EQ(r.cycles, 20u);
  EXPECT_EQ(r.resolution[kind_index(BranchKind::IndirectJump)].count, 1u);
  EXPECT_EQ(r.resolution[kind_index(BranchKind::IndirectJump)].total(), 18u);
}

TEST(FrontendGolden, MissThenSequentialBlock) {
  const std::vector<TraceEvent> trace{
      kTakenCond, {0x2010, 3, BranchKind::ConditionalDirect, false, 0x2100}};
  FrontendSim sim(FrontendConfig{}, trace);
  const auto r = sim.run(0, 2);
  EXPECT_EQ(r.cycles, 15u);
  EXPECT_EQ(r.starved_cycles, 13u);
  EXPECT_EQ(r.retired, 9u);
  EXPECT_EQ(r.l2btb_misses, 1u);
  EXPECT_EQ(r.not_taken_misses, 1u);
  EXPECT_EQ(r.all_branch_misses, 2u);
}

TEST(Frontend, SequentialCodeNeverStarvesAfterWarmup) {
  std::vector<TraceEvent> trace;
  for (Addr i = 0; i < 20'000; ++i) {
    const Addr pc = 0x10000 + i * 24;
    trace.push_back({pc, 5, BranchKind::ConditionalDirect, false, pc + 0x400});
  }
  FrontendSim sim(with_l2(IdealSpec{}), trace);
  const auto r = sim.run(1000, 18'000);
  EXPECT_EQ(r.starved_cycles, 0u);
  EXPECT_EQ(r.l2btb_misses, 0u);
  EXPECT_DOUBLE_EQ(r.scki(), 0.0);
}

TEST(Frontend, RetiredBranchesMatchTraceForEveryOrgAndLatency) {
  Xorshift64Star rng(61);
  const auto trace = testgen::reuse_trace(rng, 6000, 30'000);
  const std::vector<OrgSpec> orgs{BaselineSpec{},
                                  BaselineSpec{256, 4, 32, std::nullopt},
                                  SkewedSpec{256, 4, 32},
                                  MbtbSpec{256, 2, true, true},
                                  MbtbSpec{256, 4, true, true},
                                  FdipxSpec{},
                                  IdealSpec{}};
  for (const auto& org : orgs) {
    for (unsigned latency : {1u, 4u}) {
      FrontendSim sim(with_l2(org, latency), trace);
      sim.enable_retired_log();
      const auto r = sim.run(5000, 20'000);
      const std::vector<TraceEvent> window(trace.begin() + 5000, trace.begin() + 25'000);
      EXPECT_EQ(sim.retired_log(), window) << describe(org) << " latency " << latency;
      EXPECT_EQ(r.retired_events, 20'000u);
      EXPECT_EQ(r.retired, window_instructions(trace, 5000, 25'000));
      EXPECT_GE(r.cycles * sim.config().retire_width, r.retired);
    }
  }
}

TEST(Frontend, ResolutionComponentsSumToTotal) {
  Xorshift64Star rng(62);
  const auto trace = testgen::reuse_trace(rng, 4000, 20'000);
  FrontendSim sim(with_l2(MbtbSpec{256, 2, true, true}), trace);
  sim.enable_resolution_log();
  const auto r = sim.run(0, 20'000);
  ASSERT_FALSE(sim.resolution_log().empty());
  ResolutionBreakdown from_log;
  for (const auto& rec : sim.resolution_log()) {
    EXPECT_EQ(rec.fetch() + rec.decode() + rec.execute(), rec.total());
    if (!rec.btb_miss) continue;
    ++from_log.count;
    from_log.fetch += rec.fetch();
    from_log.decode += rec.decode();
    from_log.execute += rec.execute();
  }
  EXPECT_EQ(r.resolution_total(), from_log);
  EXPECT_EQ(r.resolution_total().count, r.l2btb_misses);
}

TEST(Frontend, SameInputsSameReport) {
  Xorshift64Star rng(63);
  const auto trace = testgen::reuse_trace(rng, 5000, 30'000);
  const auto config = with_l2(MbtbSpec{256, 3, true, true});
  const auto a = FrontendSim(config, trace).run(10'000, 20'000);
  const auto b = FrontendSim(config, trace).run(10'000, 20'000);
  EXPECT_EQ(a, b);
}

TEST(Frontend, EmptyMeasureAndShortTrace) {
  const std::vector<TraceEvent> trace{kTakenCond, kTakenCond};
  FrontendSim sim(FrontendConfig{}, trace);
  EXPECT_EQ(sim.run(1, 0), MetricsReport{});
  FrontendSim short_sim(FrontendConfig{}, trace);
  EXPECT_THROW(short_sim.run(1, 2), std::invalid_argument);
}

TEST(Frontend, IdealIsALowerBoundOnMisses) {
  Xorshift64Star rng(64);
  const auto trace = testgen::reuse_trace(rng, 8000, 40'000);
  const auto ideal = FrontendSim(with_l2(IdealSpec{}), trace).run(10'000, 30'000);
  for (const OrgSpec& org : {OrgSpec{BaselineSpec{512, 4, 32, std::nullopt}},
                             OrgSpec{SkewedSpec{512, 4, 32}}, OrgSpec{MbtbSpec{512, 2, true, true}},
                             OrgSpec{FdipxSpec{}}}) {
    const auto r = FrontendSim(with_l2(org), trace).run(10'000, 30'000);
    EXPECT_LE(ideal.mpki(), r.mpki()) << describe(org);
    EXPECT_LE(ideal.l2btb_misses, r.l2btb_misses) << describe(org);
  }
}

TEST(Frontend, LongerL2LatencyNeverSpeedsUp) {
  Xorshift64Star rng(65);
  const auto trace = testgen::reuse_trace(rng, 8000, 40'000);
  for (const OrgSpec& org : {OrgSpec{MbtbSpec{1024, 2, true, true}}, OrgSpec{BaselineSpec{}}}) {
    std::uint64_t previous = 0;
    for (unsigned latency = 1; latency <= 5; ++latency) {
      const auto r = FrontendSim(with_l2(org, latency), trace).run(10'000, 30'000);
      EXPECT_GE(r.cycles, previous) << describe(org) << " latency " << latency;
      previous = r.cycles;
    }
  }
}

TEST(Frontend, LargerQueuesNeverShortenMissResolution) {
  Xorshift64Star rng(66);
  const auto trace = testgen::reuse_trace(rng, 8000, 40'000);
  double previous = 0;
  for (std::size_t scale : {1u, 2u, 4u}) {
    auto config = with_l2(BaselineSpec{256, 4, 32, std::nullopt});
    config.ftq_blocks = 6 * scale;
    config.decode_queue = 15 * scale;
    const auto r = FrontendSim(config, trace).run(10'000, 30'000);
    const double mean = r.resolution_total().mean();
    EXPECT_GE(mean, previous) << "scale " << scale;
    previous = mean;
  }
}

TEST(Frontend, NestedReturnsAlwaysPredictedByStack) {
  SyntheticSpec spec;
  spec.static_branch_count = 3000;
  spec.event_count = 60'000;
  spec.call_depth_max = 32;
  spec.seed = 67;
  const auto trace = gen_synthetic(spec);
  FrontendSim sim(with_l2(IdealSpec{}), trace);
  sim.enable_resolution_log();
  sim.run(0, trace.size());
  std::unordered_set<Addr> return_pcs;
  for (const auto& e : trace) {
    if (e.kind == BranchKind::Return) return_pcs.insert(e.pc);
  }
  std::size_t return_redirects = 0;
  for (const auto& rec : sim.resolution_log()) {
    if (rec.kind != BranchKind::Return) continue;
    ++return_redirects;
    EXPECT_TRUE(rec.btb_miss);
    EXPECT_EQ(rec.stage, ResolveStage::Decode);
  }
  EXPECT_EQ(return_redirects, return_pcs.size());
}

TEST(Frontend, OverflowedStackSendsReturnToExecute) {
  std::vector<TraceEvent> trace;
  for (Addr i = 0; i < 33; ++i) {
    const Addr pc = 0x10000 + i * 0x100;
    trace.push_back({pc, 0, BranchKind::DirectCall, true, pc + 0x100});
  }
  for (Addr i = 33; i-- > 0;) {
    trace.push_back({0x90000 + i * 0x10, 0, BranchKind::Return, true,
                     0x10000 + i * 0x100 + kReturnAddressStride});
  }
  FrontendSim sim(with_l2(IdealSpec{}), trace);
  sim.enable_resolution_log();
  sim.run(0, trace.size());
  const auto& log = sim.resolution_log();
  ASSERT_EQ(log.size(), 66u);
  for (std::size_t i = 33; i < 65; ++i) EXPECT_EQ(log[i].stage, ResolveStage::Decode);
  EXPECT_EQ(log[65].stage, ResolveStage::Execute);
}

TEST(Metrics, PerKiloArithmetic) {
  MetricsReport r;
  r.retired = 50'000;
  r.l2btb_misses = 430;
  EXPECT_DOUBLE_EQ(r.mpki(), 8.6);
  EXPECT_DOUBLE_EQ(r.scki(), 0.0);
  r.cycles = 25'000;
  EXPECT_DOUBLE_EQ(r.ipc_proxy(), 2.0);
  r.census_samples = 4;
  r.census_sum = 10;
  EXPECT_DOUBLE_EQ(r.resident_branches_mean(), 2.5);
  EXPECT_DOUBLE_EQ(MetricsReport{}.mpki(), 0.0);
}

TEST(Metrics, CensusFollowsRetirement) {
  Xorshift64Star rng(68);
  const auto trace = testgen::reuse_trace(rng, 2000, 30'000);
  auto config = with_l2(BaselineSpec{256, 4, 32, std::nullopt});
  config.census_interval = 1000;
  const auto r = FrontendSim(config, trace).run(0, 30'000);
  EXPECT_EQ(r.census_samples, r.retired / 1000);
  EXPECT_GT(r.resident_branches_mean(), 0.0);
  EXPECT_LE(r.resident_branches_mean(), 1024.0);
}

}  // namespace
}  // namespace btbsim
