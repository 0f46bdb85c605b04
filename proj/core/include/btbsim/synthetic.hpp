#ifndef BTBSIM_SYNTHETIC_HPP
#define BTBSIM_SYNTHETIC_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "btbsim/trace.hpp"

namespace btbsim {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of a synthetic branch workload.
///
/// Every static branch draws its offset width(s) from
/// `offset_bits_histogram`, and the dynamic stream revisits static branches
/// uniformly at random, so the realized dynamic width histogram tracks the
/// requested one. Calls and returns nest properly: each static call site is
/// bound to one static return, and that return's pc is placed so that its
/// distance to the call's return address also follows the histogram.
struct SyntheticSpec {
  std::uint64_t static_branch_count = 16384;
  std::array<double, kBranchKindCount> kind_mix = {0.70, 0.10, 0.07,
                                                   0.03, 0.03, 0.07};
  /// Weight per offset width; index = width in bits (1..57), index 0 unused.
  std::array<double, kAddrBits + 1> offset_bits_histogram{};
  std::uint32_t call_depth_max = 32;
  std::uint32_t indirect_target_fanout = 4;
  std::uint64_t event_count = 1'000'000;
  std::uint64_t seed = 1;
  /// Mean count of non-branch instructions before each branch.
  double mean_gap = 5.0;
  /// Fraction of static conditionals that are never taken; the rest draw a
  /// per-branch taken probability uniformly from [0, 1].
  double never_taken_fraction = 0.0;

  SyntheticSpec();
};

/// Throws SpecError when weights are malformed or the mix is infeasible
/// (e.g. returns without calls).
void validate(const SyntheticSpec& spec);

std::vector<TraceEvent> gen_synthetic(const SyntheticSpec& spec);

/// Reads a `[synthetic]` key/value file; see README for the keys.
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
SyntheticSpec parse_synthetic_spec(std::istream& in);
/// Canonical `[synthetic]` text that parse_synthetic_spec reads back.
std::string synthetic_spec_text(const SyntheticSpec& spec);

}  // namespace btbsim

#endif  // BTBSIM_SYNTHETIC_HPP
