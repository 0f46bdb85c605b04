#include "btbsim/trace.hpp"

#include <bit>
#include <unordered_set>

namespace btbsim {

namespace {

constexpr std::array<std::string_view, kBranchKindCount> kKindNames = {
    "ConditionalDirect", "UnconditionalDirectJump", "DirectCall",
    "IndirectJump",      "IndirectCall",            "Return",
};

}  // namespace

std::string_view kind_name(BranchKind kind) {
  return kKindNames[kind_index(kind)];
}

std::optional<BranchKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return kAllBranchKinds[i];
  }
  return std::nullopt;
}

void validate_event(const TraceEvent& event) {
  if (event.pc >= kAddrLimit || event.target >= kAddrLimit) {
    throw TraceError("address out of range");
  }
  if (kind_index(event.kind) >= kBranchKindCount) {
    throw TraceError("unknown kind code");
  }
  if (event.kind != BranchKind::ConditionalDirect && !event.taken) {
    throw TraceError("only conditional branches may be not-taken");
  }
}

unsigned offset_width(Addr pc, Addr target) {
  const Addr magnitude = pc > target ? pc - target : target - pc;
  return magnitude == 0 ? 1u : static_cast<unsigned>(std::bit_width(magnitude));
}

std::uint64_t TraceStats::events() const {
  std::uint64_t total = 0;
  for (auto n : dynamic) total += n;
  return total;
}

std::array<std::uint64_t, kAddrBits + 1> TraceStats::combined_width_hist()
    const {
  std::array<std::uint64_t, kAddrBits + 1> out{};
  for (const auto& per_kind : width_hist) {
    for (std::size_t b = 0; b < out.size(); ++b) out[b] += per_kind[b];
  }
  return out;
}

TraceStats trace_stats(std::span<const TraceEvent> events) {
  TraceStats stats;
  std::unordered_set<Addr> pcs;
  std::unordered_set<Addr> taken_pcs;
  pcs.reserve(events.size() / 4 + 1);
  for (const auto& e : events) {
    const auto k = kind_index(e.kind);
    ++stats.dynamic[k];
    ++stats.width_hist[k][offset_width(e.pc, e.target)];
    pcs.insert(e.pc);
    if (e.taken) taken_pcs.insert(e.pc);
  }
  stats.unique_pcs = pcs.size();
  stats.unique_taken = taken_pcs.size();
  return stats;
}

}  // namespace btbsim
