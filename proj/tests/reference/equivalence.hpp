// Lockstep driver comparing an organization against its reference model.
#ifndef BTBSIM_TESTS_EQUIVALENCE_HPP
#define BTBSIM_TESTS_EQUIVALENCE_HPP

#include <btbsim/btb.hpp>

#include <fmt/format.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reference/reference_models.hpp"
#include "unit/generators.hpp"

namespace ref {

struct StreamResult {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t evictions = 0;
  std::optional<std::string> mismatch;
};

/// Looks every event up in both models, then allocates taken branches that
/// missed or hit with the wrong kind or target. Stops at the first
/// difference in hit/miss outcome, hit contents, or displaced branches.
template <typename Ref>
StreamResult compare_streams(btbsim::Btb& impl, Ref& oracle,
                             std::span<const btbsim::TraceEvent> trace) {
  using btbsim::Addr;
  StreamResult s;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    const auto got = impl.lookup(e.pc);
    const auto want = oracle.lookup(e.pc);
    auto fail = [&](const char* what) {
      s.mismatch = fmt::format("event {} pc {:#x}: {}", i, e.pc, what);
      return s;
    };
    if (got.has_value() != want.has_value()) return fail("hit/miss differs");
    bool allocate = e.taken;
    if (got) {
      ++s.hits;
      if (got->kind != want->kind || got->alias != want->alias ||
          got->is_return != (want->kind == btbsim::KindCode::Return) ||
          (!got->is_return && got->target != want->target)) {
        return fail("hit contents differ");
      }
      allocate = e.taken && (got->kind != btbsim::kind_code(e.kind) ||
                             (!got->is_return && got->target != e.target));
    } else {
      ++s.misses;
    }
    if (!allocate) continue;
    const auto report = impl.insert(e.pc, e.target, e.kind);
    const auto expected = oracle.insert(e.pc, e.target, e.kind);
    const std::vector<Addr> displaced(report.branches().begin(), report.branches().end());
    if (displaced != expected) return fail("displaced branches differ");
    s.evictions += displaced.size();
  }
  return s;
}

/// Random trace with heavy reuse, mixed offset widths, changing indirect
/// targets and occasional pcs that alias in their lower 28 bits.
inline std::vector<btbsim::TraceEvent> stress_trace(std::uint64_t seed, std::size_t n) {
  using btbsim::Addr;
  btbsim::Xorshift64Star rng(seed);
  auto trace = btbsim::testgen::reuse_trace(rng, 12'000, n, Addr{1} << 20);
  for (auto& e : trace) {
    if (rng.next_below(50) == 0) {
      const Addr high = (1 + rng.next_below(7)) << 40;
      e.pc |= high;
      e.target = (e.target | high) & btbsim::kAddrMask;
    }
  }
  return trace;
}

}  // namespace ref

#endif  // BTBSIM_TESTS_EQUIVALENCE_HPP
