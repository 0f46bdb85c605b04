#ifndef BTBSIM_FRONTEND_HPP
#define BTBSIM_FRONTEND_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "btbsim/btb.hpp"
#include "btbsim/metrics.hpp"
#include "btbsim/ras.hpp"
#include "btbsim/trace.hpp"

namespace btbsim {

struct FrontendConfig {
  std::size_t ftq_blocks = 24;
  std::size_t instrs_per_block = 8;
  /// Instructions moved from fetched FTQ blocks into the decode queue per cycle.
  std::size_t fetch_width = 8;
  std::size_t decode_queue = 60;
  std::size_t decode_width = 6;
  std::size_t dispatch_width = 6;
  std::size_t retire_width = 6;
  std::size_t rob_size = 352;
  unsigned l1i_latency = 4;
  BtbSpec l1btb{BaselineSpec{64, 2, 32, std::nullopt}, 1};
  BtbSpec l2btb{BaselineSpec{}, 2};
  std::size_t ras_depth = 32;
  /// Cycles from dispatch to resolution for branches resolved at execute.
  unsigned execute_resolve_delay = 12;
  std::uint64_t census_interval = 100000;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when a size or width is zero.
  void validate() const;
};

enum class ResolveStage : std::uint8_t { Decode, Execute };

/// One redirect caused by a mispredicted branch.
struct ResolutionRecord {
  std::size_t event = 0;
  BranchKind kind = BranchKind::ConditionalDirect;
  bool btb_miss = false;
  ResolveStage stage = ResolveStage::Decode;
  std::uint64_t predicted = 0;   // cycle the prediction stage handled it
  std::uint64_t dq_enter = 0;    // cycle it entered the decode queue
  std::uint64_t dispatched = 0;  // cycle decode handed it to the backend
  std::uint64_t resolved = 0;

  std::uint64_t fetch() const { return dq_enter - predicted; }
  std::uint64_t decode() const { return dispatched - dq_enter; }
  std::uint64_t execute() const { return resolved - dispatched; }
  std::uint64_t total() const { return resolved - predicted; }
};

/// Cycle-stepped decoupled front-end driven by a branch trace.
///
/// Stages run in this order within a cycle: retire, execute-stage
/// resolution, decode/dispatch, FTQ to decode queue, L1I issue, prediction.
/// Only taken branches are inserted into the BTBs, at resolution, and the
/// wrong path carries no branches, so BTB contents evolve in program order
/// regardless of timing parameters.
class FrontendSim {
 public:
  FrontendSim(const FrontendConfig& config, std::span<const TraceEvent> trace);

  void step_cycle();

  /// Places `count` non-branch instructions in the decode queue, decodable
  /// from cycle 0. They retire but are never counted.
  void prefill_decode_queue(std::size_t count);

  /// Simulates until the (warmup + measure)-th branch retires. Cycle and
  /// instruction counters start when the warmup-th branch retires; per-branch
  /// counters cover trace events [warmup, warmup + measure). Throws
  /// std::invalid_argument when the trace is too short.
  MetricsReport run(std::uint64_t warmup, std::uint64_t measure);

  /// Record every redirect in resolution_log().
  void enable_resolution_log() { log_resolutions_ = true; }
  const std::vector<ResolutionRecord>& resolution_log() const { return resolution_log_; }

  /// Collect the measured retired branches in order.
  void enable_retired_log() { log_retired_ = true; }
  const std::vector<TraceEvent>& retired_log() const { return retired_log_; }

  std::uint64_t cycle() const { return cycle_; }
  const Btb& l1btb() const { return *l1_; }
  const Btb& l2btb() const { return *l2_; }
  const FrontendConfig& config() const { return config_; }

 private:
  struct Inst {
    std::int64_t event = -1;  // trace index for branches
    bool wrong_path = false;
    bool filler = false;
    bool mispredicted = false;
    bool btb_miss = false;
    ResolveStage stage = ResolveStage::Decode;
    std::uint64_t predicted = 0;
    std::uint64_t dq_enter = 0;
    std::uint64_t decodable = 0;
    std::uint64_t dispatched = 0;
  };

  struct Block {
    std::size_t remaining = 0;
    std::uint64_t ready = 0;
    bool issued = false;
    std::uint64_t fetch_done = 0;
  };

  struct RobEntry {
    Inst inst;
    std::uint64_t ready = 0;
    bool pending = false;
  };

  bool measured_event(std::size_t e) const {
    return e >= window_begin_ && e < window_end_;
  }

  void retire_stage();
  void execute_stage();
  bool decode_stage();
  void fetch_stage();
  void l1i_stage();
  void predict_stage();

  Inst predict_branch(std::size_t e, bool& l2_used, bool& predicted_taken);
  void resolve(const Inst& inst);
  void flush_wrong_path();
  void take_census();

  FrontendConfig config_;
  std::span<const TraceEvent> trace_;
  std::unique_ptr<Btb> l1_;
  std::unique_ptr<Btb> l2_;
  ReturnAddressStack ras_;

  std::uint64_t cycle_ = 0;
  std::uint64_t pred_ready_ = 0;
  std::size_t next_event_ = 0;
  std::uint32_t gap_left_ = 0;
  bool wrong_path_ = false;

  std::deque<Block> ftq_;
  std::deque<Inst> ftq_insts_;
  std::deque<Inst> decode_queue_;
  std::deque<RobEntry> rob_;
  std::optional<std::uint64_t> pending_resolve_cycle_;

  // Measurement state.
  std::size_t window_begin_ = 0;
  std::size_t window_end_ = 0;
  std::uint64_t retired_events_total_ = 0;
  bool measuring_ = false;
  bool finished_ = false;
  std::uint64_t count_from_cycle_ = 0;
  std::uint64_t stop_cycle_ = 0;
  std::uint64_t last_progress_cycle_ = 0;
  MetricsReport report_;

  bool log_resolutions_ = false;
  bool log_retired_ = false;
  std::vector<ResolutionRecord> resolution_log_;
  std::vector<TraceEvent> retired_log_;
};

}  // namespace btbsim

#endif  // BTBSIM_FRONTEND_HPP
