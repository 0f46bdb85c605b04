#include "btbsim/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "btbsim/config.hpp"
#include "btbsim/rng.hpp"

namespace btbsim {

SyntheticSpec::SyntheticSpec() {
  // Roughly the shape of server code: most offsets are short, a tail of
  // calls/returns crosses far.
  for (unsigned b = 2; b <= 14; ++b) offset_bits_histogram[b] = 0.9 / 13.0;
  for (unsigned b = 15; b <= 32; ++b) offset_bits_histogram[b] = 0.1 / 18.0;
}

namespace {

constexpr Addr kCodeBase = 0x400000;

class WeightedSampler {
 public:
  template <typename Range>
  explicit WeightedSampler(const Range& weights) {
    double acc = 0;
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
  }

  std::size_t sample(Xorshift64Star& rng) const {
    const double u = rng.next_double() * cumulative_.back();
    // First bucket whose cumulative weight exceeds u; never a zero-weight one.
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()),
                    cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

Addr sample_magnitude(unsigned width, Xorshift64Star& rng) {
  if (width <= 1) return 1;
  const Addr low = Addr{1} << (width - 1);
  return low + rng.next_below(low);
}

/// origin +/- magnitude, picking the direction at random when both fit.
std::optional<Addr> place(Addr origin, Addr magnitude, Xorshift64Star& rng) {
  const bool fwd_ok = magnitude < kAddrLimit - origin;
  const bool bwd_ok = magnitude <= origin;
  if (fwd_ok && bwd_ok) {
    return (rng.next() & 1) ? origin + magnitude : origin - magnitude;
  }
  if (fwd_ok) return origin + magnitude;
  if (bwd_ok) return origin - magnitude;
  return std::nullopt;
}

struct StaticBranch {
  Addr pc = 0;
  BranchKind kind = BranchKind::ConditionalDirect;
  std::uint32_t gap = 0;
  double p_taken = 1.0;
  std::vector<Addr> targets;
  std::size_t bound_return = 0;  // calls only: index into statics
};

std::array<std::uint64_t, kBranchKindCount> apportion(const SyntheticSpec& spec) {
  const double total =
      std::accumulate(spec.kind_mix.begin(), spec.kind_mix.end(), 0.0);
  const auto n = spec.static_branch_count;
  std::array<std::uint64_t, kBranchKindCount> counts{};
  std::array<double, kBranchKindCount> frac{};
  std::uint64_t assigned = 0;
  for (std::size_t k = 0; k < kBranchKindCount; ++k) {
    const double exact = spec.kind_mix[k] / total * static_cast<double>(n);
    counts[k] = static_cast<std::uint64_t>(std::floor(exact));
    frac[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kBranchKindCount; ++k) {
      if (frac[k] > frac[best]) best = k;
    }
    ++counts[best];
    frac[best] = -1;
    ++assigned;
  }

  const auto ret = kind_index(BranchKind::Return);
  const auto dc = kind_index(BranchKind::DirectCall);
  const auto ic = kind_index(BranchKind::IndirectCall);
  const bool wants_calls = spec.kind_mix[dc] + spec.kind_mix[ic] > 0;
  if (!wants_calls) return counts;

  if (n < 2) {
    throw SpecError("calls and returns need at least two static branches");
  }
  const auto call_kind = spec.kind_mix[dc] >= spec.kind_mix[ic] ? dc : ic;
  auto calls = [&] { return counts[dc] + counts[ic]; };
  auto take_largest = [&](auto eligible) {
    std::size_t best = kBranchKindCount;
    for (std::size_t k = 0; k < kBranchKindCount; ++k) {
      if (eligible(k) && counts[k] > 0 &&
          (best == kBranchKindCount || counts[k] > counts[best])) {
        best = k;
      }
    }
    if (best == kBranchKindCount) throw SpecError("infeasible kind mix");
    --counts[best];
  };
  if (counts[ret] == 0) {
    take_largest([&](std::size_t k) {
      return k != ret && !((k == dc || k == ic) && calls() <= 1);
    });
    ++counts[ret];
  }
  if (calls() == 0) {
    take_largest([&](std::size_t k) {
      return k != dc && k != ic && !(k == ret && counts[ret] <= 1);
    });
    ++counts[call_kind];
  }
  while (counts[ret] > calls()) {
    --counts[ret];
    ++counts[call_kind];
  }
  return counts;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.static_branch_count == 0) {
    throw SpecError("static_branch_count must be positive");
  }
  if (spec.event_count == 0) throw SpecError("event_count must be positive");
  if (spec.call_depth_max == 0) {
    throw SpecError("call_depth_max must be positive");
  }
  if (spec.indirect_target_fanout == 0) {
    throw SpecError("indirect_target_fanout must be positive");
  }
  if (!(spec.mean_gap >= 0) || spec.mean_gap > 1e6) {
    throw SpecError("mean_gap must be in [0, 1e6]");
  }
  if (!(spec.never_taken_fraction >= 0 && spec.never_taken_fraction <= 1)) {
    throw SpecError("never_taken_fraction must be in [0, 1]");
  }
  auto check_weights = [](const auto& weights, std::string_view what) {
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0) || !std::isfinite(w)) {
        throw SpecError(fmt::format("{} weights must be finite and non-negative",
                                    what));
      }
      total += w;
    }
    if (total <= 0) {
      throw SpecError(fmt::format("{} needs at least one positive weight", what));
    }
  };
  check_weights(spec.kind_mix, "kind_mix");
  check_weights(spec.offset_bits_histogram, "offset_bits_histogram");
  if (spec.offset_bits_histogram[0] > 0) {
    throw SpecError("offset_bits_histogram has no width-0 bucket");
  }
  const double calls = spec.kind_mix[kind_index(BranchKind::DirectCall)] +
                       spec.kind_mix[kind_index(BranchKind::IndirectCall)];
  const double returns = spec.kind_mix[kind_index(BranchKind::Return)];
  if (returns > 0 && calls <= 0) {
    throw SpecError("infeasible spec: Return weight positive but call weight zero");
  }
  if (calls > 0 && returns <= 0) {
    throw SpecError("infeasible spec: call weight positive but Return weight zero");
  }
}

std::vector<TraceEvent> gen_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  Xorshift64Star rng(spec.seed);
  const WeightedSampler widths(spec.offset_bits_histogram);
  const auto counts = apportion(spec);
  const auto n = spec.static_branch_count;

  std::vector<StaticBranch> statics;
  statics.reserve(n);
  // Returns first so calls can be placed relative to them.
  for (auto kind : {BranchKind::Return, BranchKind::ConditionalDirect,
                    BranchKind::UnconditionalDirectJump, BranchKind::DirectCall,
                    BranchKind::IndirectJump, BranchKind::IndirectCall}) {
    for (std::uint64_t i = 0; i < counts[kind_index(kind)]; ++i) {
      StaticBranch b;
      b.kind = kind;
      statics.push_back(std::move(b));
    }
  }

  const Addr span = std::max<Addr>(n * 64, 1 << 16);
  std::unordered_set<Addr> used;
  used.reserve(n * 2);
  auto random_region_pc = [&] {
    while (true) {
      const Addr pc = kCodeBase + rng.next_below(span);
      if (used.insert(pc).second) return pc;
    }
  };
  auto width_magnitude = [&] {
    return sample_magnitude(static_cast<unsigned>(widths.sample(rng)), rng);
  };

  std::vector<std::size_t> return_ids;
  for (std::size_t i = 0; i < statics.size(); ++i) {
    if (statics[i].kind == BranchKind::Return) {
      statics[i].pc = random_region_pc();
      return_ids.push_back(i);
    }
  }

  std::size_t call_ordinal = 0;
  for (auto& s : statics) {
    if (s.kind == BranchKind::Return) continue;
    if (is_call(s.kind)) {
      s.bound_return = return_ids[call_ordinal++ % return_ids.size()];
      const Addr ret_pc = statics[s.bound_return].pc;
      bool placed = false;
      for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
        const auto ra = place(ret_pc, width_magnitude(), rng);
        if (!ra || *ra < kReturnAddressStride) continue;
        const Addr pc = *ra - kReturnAddressStride;
        if (used.insert(pc).second) {
          s.pc = pc;
          placed = true;
        }
      }
      if (!placed) s.pc = random_region_pc();
    } else {
      s.pc = random_region_pc();
    }

    const std::uint32_t fanout =
        is_indirect(s.kind) ? spec.indirect_target_fanout : 1;
    for (std::uint32_t t = 0; t < fanout; ++t) {
      const auto width = static_cast<unsigned>(widths.sample(rng));
      auto target = place(s.pc, sample_magnitude(width, rng), rng);
      if (!target) target = s.pc + (Addr{1} << (width - 1));
      s.targets.push_back(*target);
    }
  }

  const double p_gap = 1.0 / (spec.mean_gap + 1.0);
  for (auto& s : statics) {
    if (spec.mean_gap > 0) {
      const double u = 1.0 - rng.next_double();
      const double g = std::floor(std::log(u) / std::log1p(-p_gap));
      s.gap = static_cast<std::uint32_t>(std::min(g, 4294967295.0));
    }
    if (s.kind == BranchKind::ConditionalDirect) {
      s.p_taken = rng.next_double() < spec.never_taken_fraction
                      ? 0.0
                      : rng.next_double();
    }
  }

  std::vector<std::size_t> non_returns;
  for (std::size_t i = 0; i < statics.size(); ++i) {
    if (statics[i].kind != BranchKind::Return) non_returns.push_back(i);
  }

  std::vector<TraceEvent> events;
  events.reserve(spec.event_count);
  std::vector<std::size_t> call_stack;
  call_stack.reserve(spec.call_depth_max);

  auto emit_return = [&] {
    const auto& call = statics[call_stack.back()];
    const auto& ret = statics[call.bound_return];
    call_stack.pop_back();
    events.push_back(TraceEvent{ret.pc, ret.gap, BranchKind::Return, true,
                                call.pc + kReturnAddressStride});
  };

  while (events.size() < spec.event_count) {
    std::size_t id = rng.next_below(statics.size());
    if (statics[id].kind == BranchKind::Return) {
      if (!call_stack.empty()) {
        emit_return();
        continue;
      }
      id = non_returns[rng.next_below(non_returns.size())];
    }
    const auto& s = statics[id];
    if (is_call(s.kind) && call_stack.size() >= spec.call_depth_max) {
      emit_return();
      continue;
    }
    TraceEvent e{s.pc, s.gap, s.kind, true, s.targets.front()};
    if (s.targets.size() > 1) e.target = s.targets[rng.next_below(s.targets.size())];
    if (s.kind == BranchKind::ConditionalDirect) {
      e.taken = rng.next_double() < s.p_taken;
    }
    if (is_call(s.kind)) call_stack.push_back(id);
    events.push_back(e);
  }
  return events;
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
  const auto file = KeyValueFile::parse(in);
  const auto* section = file.find("synthetic");
  if (section == nullptr) throw ConfigError("missing [synthetic] section");
  section->reject_unknown({"static_branch_count", "kind_mix",
                           "offset_bits_histogram", "call_depth_max",
                           "indirect_target_fanout", "event_count", "seed",
                           "mean_gap", "never_taken_fraction"});
  SyntheticSpec spec;
  spec.static_branch_count =
      section->get_uint("static_branch_count", spec.static_branch_count);
  spec.call_depth_max = static_cast<std::uint32_t>(
      section->get_uint("call_depth_max", spec.call_depth_max));
  spec.indirect_target_fanout = static_cast<std::uint32_t>(
      section->get_uint("indirect_target_fanout", spec.indirect_target_fanout));
  spec.event_count = section->get_uint("event_count", spec.event_count);
  spec.seed = section->get_uint("seed", spec.seed);
  spec.mean_gap = section->get_double("mean_gap", spec.mean_gap);
  spec.never_taken_fraction =
      section->get_double("never_taken_fraction", spec.never_taken_fraction);
  if (auto mix = section->get("kind_mix")) {
    spec.kind_mix.fill(0);
    for (const auto& [name, weight] : parse_pairs(*mix)) {
      const auto kind = kind_from_name(name);
      if (!kind) throw ConfigError(fmt::format("kind_mix: unknown kind '{}'", name));
      spec.kind_mix[kind_index(*kind)] = parse_double(weight, "kind_mix");
    }
  }
  if (auto hist = section->get("offset_bits_histogram")) {
    spec.offset_bits_histogram.fill(0);
    for (const auto& [width, weight] : parse_pairs(*hist)) {
      const auto b = parse_uint(width, "offset_bits_histogram width");
      if (b < 1 || b > kAddrBits) {
        throw ConfigError(fmt::format("offset width {} outside 1..{}", b, kAddrBits));
      }
      spec.offset_bits_histogram[b] =
          parse_double(weight, "offset_bits_histogram");
    }
  }
  return spec;
}

std::string synthetic_spec_text(const SyntheticSpec& spec) {
  std::string mix;
  for (const auto kind : kAllBranchKinds) {
    const double w = spec.kind_mix[kind_index(kind)];
    if (w == 0) continue;
    if (!mix.empty()) mix += ", ";
    mix += fmt::format("{}:{}", kind_name(kind), w);
  }
  std::string hist;
  for (unsigned b = 1; b <= kAddrBits; ++b) {
    const double w = spec.offset_bits_histogram[b];
    if (w == 0) continue;
    if (!hist.empty()) hist += ", ";
    hist += fmt::format("{}:{}", b, w);
  }
  return fmt::format(
      "[synthetic]\nstatic_branch_count = {}\nkind_mix = {}\noffset_bits_histogram = {}\n"
      "call_depth_max = {}\nindirect_target_fanout = {}\nevent_count = {}\nseed = {}\n"
      "mean_gap = {}\nnever_taken_fraction = {}\n",
      spec.static_branch_count, mix, hist, spec.call_depth_max, spec.indirect_target_fanout,
      spec.event_count, spec.seed, spec.mean_gap, spec.never_taken_fraction);
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open spec '{}'", path.string()));
  }
  return parse_synthetic_spec(in);
}

}  // namespace btbsim
