#include <btbsim/trace.hpp>
#include <btbsim/trace_io.hpp>
#include <btbsim/rng.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>
#include <vector>

#include "unit/generators.hpp"

namespace btbsim {
namespace {

std::string encode(std::span<const TraceEvent> events) {
  std::ostringstream out;
  write_trace(events, out);
  return out.str();
}

std::vector<TraceEvent> decode(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_trace(in);
}

TEST(TraceIo, EmptyTraceIsHeaderOnly) {
  const auto bytes = encode({});
  EXPECT_EQ(bytes.size(), kTraceHeaderBytes);
  EXPECT_EQ(bytes, std::string(kTraceMagic));
  EXPECT_TRUE(decode(bytes).empty());
}

TEST(TraceIo, SingleRecordLayout) {
  const TraceEvent ev{0x1000, 3, BranchKind::ConditionalDirect, true, 0x1010};
  const std::vector<TraceEvent> events{ev};
  const auto bytes = encode(events);
  ASSERT_EQ(bytes.size(), kTraceHeaderBytes + kTraceRecordBytes);
  const unsigned char expected[24] = {0x00, 0x10, 0, 0, 0, 0, 0, 0,  // pc
                                      0x10, 0x10, 0, 0, 0, 0, 0, 0,  // target
                                      3,    0,    0, 0,              // gap
                                      0,    1,    0, 0};             // kind, taken, reserved
  EXPECT_EQ(std::memcmp(bytes.data() + kTraceHeaderBytes, expected, 24), 0);
  EXPECT_EQ(decode(bytes), events);
}

TEST(TraceIo, MaxGapRoundtrips) {
  const std::vector<TraceEvent> events{
      {0x40, 0xFFFFFFFFu, BranchKind::UnconditionalDirectJump, true, 0x80}};
  EXPECT_EQ(decode(encode(events)), events);
}

TEST(TraceIo, RandomSequencesRoundtrip) {
  Xorshift64Star rng(11);
  for (int i = 0; i < 10'000; ++i) {
    const auto events = testgen::random_events(rng, rng.next_below(40));
    ASSERT_EQ(decode(encode(events)), events) << "sequence " << i;
  }
}

TEST(TraceIo, ThousandEventRoundtripBinaryAndText) {
  Xorshift64Star rng(12);
  const auto events = testgen::random_events(rng, 1000);
  EXPECT_EQ(decode(encode(events)), events);
  std::ostringstream text;
  write_trace_text(events, text);
  std::istringstream in(text.str());
  EXPECT_EQ(read_trace_text(in), events);
}

TEST(TraceIo, RejectsBadMagic) {
  auto bytes = encode({});
  bytes[0] = 'X';
  EXPECT_THROW(decode(bytes), TraceError);
  EXPECT_THROW(decode("BTB"), TraceError);
}

TEST(TraceIo, RejectsTruncatedRecord) {
  const std::vector<TraceEvent> events{{0x1000, 0, BranchKind::Return, true, 0x2000}};
  auto bytes = encode(events);
  bytes.pop_back();
  EXPECT_THROW(decode(bytes), TraceError);
}

TEST(TraceIo, RejectsAddressWithBit57) {
  const std::vector<TraceEvent> events{{0x1000, 0, BranchKind::DirectCall, true, 0x2000}};
  auto bytes = encode(events);
  bytes[kTraceHeaderBytes + 7] = 0x02;  // pc bit 57
  try {
    decode(bytes);
    FAIL() << "expected TraceError";
  } catch (const TraceError& e) {
    EXPECT_STREQ(e.what(), "address out of range");
  }
}

TEST(TraceIo, RejectsUnknownKind) {
  const std::vector<TraceEvent> events{{0x1000, 0, BranchKind::DirectCall, true, 0x2000}};
  auto bytes = encode(events);
  bytes[kTraceHeaderBytes + 20] = 6;
  EXPECT_THROW(decode(bytes), TraceError);
}

TEST(TraceIo, TextFormatParsesCommentsAndNames) {
  std::istringstream in(
      "# comment\n"
      "\n"
      "1000 3 ConditionalDirect N 1010\n"
      "2000 0 Return T 1234\n");
  const auto events = read_trace_text(in);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0], (TraceEvent{0x1000, 3, BranchKind::ConditionalDirect, false, 0x1010}));
  EXPECT_EQ(events[1], (TraceEvent{0x2000, 0, BranchKind::Return, true, 0x1234}));
  std::istringstream bad("1000 3 Sideways T 1010\n");
  EXPECT_THROW(read_trace_text(bad), TraceError);
}

TEST(TraceEvent, ValidateRejectsNotTakenUnconditional) {
  EXPECT_THROW(validate_event({0x10, 0, BranchKind::IndirectJump, false, 0x20}), TraceError);
  EXPECT_NO_THROW(validate_event({0x10, 0, BranchKind::ConditionalDirect, false, 0x20}));
  EXPECT_THROW(validate_event({kAddrLimit, 0, BranchKind::ConditionalDirect, true, 0}),
               TraceError);
}

TEST(TraceStats, EmptyTraceIsAllZero) {
  const auto s = trace_stats({});
  EXPECT_EQ(s.events(), 0u);
  EXPECT_EQ(s.unique_pcs, 0u);
  for (auto n : s.combined_width_hist()) EXPECT_EQ(n, 0u);
}

TEST(TraceStats, WidthOfSixteenByteOffsetIsFive) {
  const std::vector<TraceEvent> events{
      {0x1000, 0, BranchKind::ConditionalDirect, true, 0x1010}};
  const auto s = trace_stats(events);
  EXPECT_EQ(s.width_hist[kind_index(BranchKind::ConditionalDirect)][5], 1u);
  EXPECT_EQ(offset_width(0x1000, 0x1000), 1u);
  EXPECT_EQ(offset_width(0x1000, 0x0FFF), 1u);
  EXPECT_EQ(offset_width(0, 0x8000), 16u);
}

TEST(TraceStats, CountsAreAdditiveOverConcatenation) {
  Xorshift64Star rng(13);
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_events(rng, rng.next_below(50));
    const auto b = testgen::random_events(rng, rng.next_below(50));
    const auto sa = trace_stats(a);
    const auto sb = trace_stats(b);
    a.insert(a.end(), b.begin(), b.end());
    const auto sab = trace_stats(a);
    for (std::size_t k = 0; k < kBranchKindCount; ++k) {
      EXPECT_EQ(sab.dynamic[k], sa.dynamic[k] + sb.dynamic[k]);
      for (unsigned w = 0; w <= kAddrBits; ++w) {
        EXPECT_EQ(sab.width_hist[k][w], sa.width_hist[k][w] + sb.width_hist[k][w]);
      }
    }
    EXPECT_EQ(sab.events(), a.size());
  }
}

}  // namespace
}  // namespace btbsim
