#ifndef BTBSIM_METRICS_HPP
#define BTBSIM_METRICS_HPP

#include <array>
#include <cstdint>

#include "btbsim/trace.hpp"

namespace btbsim {

/// Resolution latency of BTB-missing taken branches of one kind, split into
/// time before entering the decode queue, time in the decode queue, and time
/// from dispatch to resolution.
struct ResolutionBreakdown {
  std::uint64_t count = 0;
  std::uint64_t fetch = 0;
  std::uint64_t decode = 0;
  std::uint64_t execute = 0;

  std::uint64_t total() const { return fetch + decode + execute; }
  double mean() const {
    return count == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(count);
  }

  friend bool operator==(const ResolutionBreakdown&, const ResolutionBreakdown&) = default;
};

struct MetricsReport {
  std::uint64_t retired = 0;         // correct-path instructions, branches included
  std::uint64_t retired_events = 0;  // branches
  std::uint64_t cycles = 0;
  std::uint64_t starved_cycles = 0;
  std::uint64_t l2btb_misses = 0;      // taken branches missing every BTB level
  std::uint64_t all_branch_misses = 0; // taken and not-taken
  std::uint64_t not_taken_misses = 0;
  std::uint64_t false_hits = 0;
  std::uint64_t wrong_target_hits = 0;
  std::uint64_t evictions = 0;
  std::uint64_t census_samples = 0;
  std::uint64_t census_sum = 0;
  std::array<ResolutionBreakdown, kBranchKindCount> resolution{};

  double mpki() const { return per_kilo(l2btb_misses); }
  double scki() const { return per_kilo(starved_cycles); }
  double ipc_proxy() const {
    return cycles == 0 ? 0.0 : static_cast<double>(retired) / static_cast<double>(cycles);
  }
  double resident_branches_mean() const {
    return census_samples == 0
               ? 0.0
               : static_cast<double>(census_sum) / static_cast<double>(census_samples);
  }
  ResolutionBreakdown resolution_total() const;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;

 private:
  double per_kilo(std::uint64_t n) const {
    return retired == 0 ? 0.0 : 1000.0 * static_cast<double>(n) / static_cast<double>(retired);
  }
};

}  // namespace btbsim

#endif  // BTBSIM_METRICS_HPP
