#include "btbsim/frontend.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace btbsim {

namespace {

// A simulation that retires nothing for this long has deadlocked.
constexpr std::uint64_t kStallLimit = 1'000'000;

}  // namespace

void FrontendConfig::validate() const {
  const std::pair<std::size_t, const char*> sizes[] = {
      {ftq_blocks, "ftq_blocks"},       {instrs_per_block, "instrs_per_block"},
      {fetch_width, "fetch_width"},     {decode_queue, "decode_queue"},
      {decode_width, "decode_width"},   {dispatch_width, "dispatch_width"},
      {retire_width, "retire_width"},   {rob_size, "rob_size"},
      {ras_depth, "ras_depth"},         {l1i_latency, "l1i_latency"},
      {l1btb.latency, "l1btb latency"}, {execute_resolve_delay, "execute_delay"},
      {census_interval, "census_interval"},
  };
  for (const auto& [value, name] : sizes) {
    if (value == 0) throw std::invalid_argument(fmt::format("{} must be positive", name));
  }
  btbsim::validate(l1btb.org);
  btbsim::validate(l2btb.org);
}

FrontendSim::FrontendSim(const FrontendConfig& config,
                         std::span<const TraceEvent> trace)
    : config_(config), trace_(trace), ras_(config.ras_depth) {
  config_.validate();
  l1_ = make_btb(config_.l1btb.org, config_.seed);
  l2_ = make_btb(config_.l2btb.org, config_.seed);
  if (!trace_.empty()) gap_left_ = trace_[0].gap;
}

void FrontendSim::prefill_decode_queue(std::size_t count) {
  if (decode_queue_.size() + count > config_.decode_queue) {
    throw std::invalid_argument("prefill exceeds decode queue capacity");
  }
  for (std::size_t i = 0; i < count; ++i) {
    Inst in;
    in.filler = true;
    decode_queue_.push_back(in);
  }
}

void FrontendSim::step_cycle() {
  retire_stage();
  execute_stage();
  const bool starved = decode_stage();
  fetch_stage();
  l1i_stage();
  predict_stage();
  if (measuring_ && cycle_ >= count_from_cycle_ && starved) ++report_.starved_cycles;
  ++cycle_;
}

void FrontendSim::retire_stage() {
  for (std::size_t n = 0; n < config_.retire_width && !rob_.empty(); ++n) {
    const auto& head = rob_.front();
    if (head.inst.wrong_path || head.pending || head.ready > cycle_) break;
    const Inst inst = head.inst;
    rob_.pop_front();
    last_progress_cycle_ = cycle_;
    if (inst.filler) continue;

    if (measuring_) {
      ++report_.retired;
      if (report_.retired % config_.census_interval == 0) take_census();
    }
    if (inst.event < 0) continue;

    const auto e = static_cast<std::size_t>(inst.event);
    ++retired_events_total_;
    if (!measuring_ && retired_events_total_ == window_begin_) {
      measuring_ = true;
      count_from_cycle_ = cycle_ + 1;
      continue;
    }
    if (measuring_) {
      ++report_.retired_events;
      if (log_retired_) retired_log_.push_back(trace_[e]);
      if (retired_events_total_ == window_end_) {
        finished_ = true;
        stop_cycle_ = cycle_;
        return;
      }
    }
  }
}

void FrontendSim::execute_stage() {
  if (!pending_resolve_cycle_ || *pending_resolve_cycle_ != cycle_) return;
  pending_resolve_cycle_.reset();
  for (auto it = rob_.rbegin(); it != rob_.rend(); ++it) {
    if (it->pending) {
      it->pending = false;
      resolve(it->inst);
      return;
    }
  }
  throw std::logic_error("pending resolution without a ROB entry");
}

bool FrontendSim::decode_stage() {
  const std::size_t width = std::min(config_.decode_width, config_.dispatch_width);
  const bool eligible =
      !decode_queue_.empty() && decode_queue_.front().decodable <= cycle_;
  std::size_t delivered = 0;
  while (delivered < width && !decode_queue_.empty() && rob_.size() < config_.rob_size) {
    Inst in = decode_queue_.front();
    if (in.decodable > cycle_) break;
    decode_queue_.pop_front();
    in.dispatched = cycle_;
    ++delivered;

    RobEntry entry{in, cycle_ + 1, false};
    if (in.event >= 0) {
      const auto kind = trace_[static_cast<std::size_t>(in.event)].kind;
      const bool at_execute = in.mispredicted && in.stage == ResolveStage::Execute;
      if (is_indirect(kind) || at_execute) {
        entry.ready = cycle_ + config_.execute_resolve_delay;
      }
      if (at_execute) {
        entry.pending = true;
        pending_resolve_cycle_ = cycle_ + config_.execute_resolve_delay;
      }
    }
    rob_.push_back(entry);
    if (in.mispredicted && in.stage == ResolveStage::Decode) {
      resolve(in);
      break;
    }
  }
  return delivered == 0 && !eligible;
}

void FrontendSim::fetch_stage() {
  std::size_t moved = 0;
  while (moved < config_.fetch_width && decode_queue_.size() < config_.decode_queue &&
         !ftq_.empty()) {
    auto& block = ftq_.front();
    if (!block.issued || block.fetch_done > cycle_) break;
    Inst in = ftq_insts_.front();
    ftq_insts_.pop_front();
    in.dq_enter = cycle_;
    in.decodable = cycle_ + 1;
    decode_queue_.push_back(in);
    ++moved;
    if (--block.remaining == 0) ftq_.pop_front();
  }
}

void FrontendSim::l1i_stage() {
  for (auto& block : ftq_) {
    if (!block.issued && block.ready <= cycle_) {
      block.issued = true;
      block.fetch_done = cycle_ + config_.l1i_latency;
    }
  }
}

void FrontendSim::predict_stage() {
  if (cycle_ < pred_ready_ || ftq_.size() >= config_.ftq_blocks) return;
  if (!wrong_path_ && next_event_ >= trace_.size()) return;

  Block block;
  bool l2_used = false;
  while (block.remaining < config_.instrs_per_block) {
    Inst in;
    in.predicted = cycle_;
    if (wrong_path_) {
      in.wrong_path = true;
    } else if (next_event_ >= trace_.size()) {
      break;
    } else if (gap_left_ > 0) {
      --gap_left_;
    } else {
      bool taken = false;
      in = predict_branch(next_event_, l2_used, taken);
      ++next_event_;
      if (next_event_ < trace_.size()) gap_left_ = trace_[next_event_].gap;
      ftq_insts_.push_back(in);
      ++block.remaining;
      if (taken) break;
      continue;
    }
    ftq_insts_.push_back(in);
    ++block.remaining;
  }
  if (block.remaining == 0) return;
  block.ready = cycle_ + config_.l1btb.latency + (l2_used ? config_.l2btb.latency : 0);
  pred_ready_ = block.ready;
  ftq_.push_back(block);
}

FrontendSim::Inst FrontendSim::predict_branch(std::size_t e, bool& l2_used,
                                              bool& predicted_taken) {
  const auto& ev = trace_[e];
  const bool measured = measured_event(e);
  Inst in;
  in.event = static_cast<std::int64_t>(e);
  in.predicted = cycle_;

  auto hit = l1_->lookup(ev.pc);
  if (!hit) {
    hit = l2_->lookup(ev.pc);
    if (hit) {
      l2_used = true;
      l1_->insert(ev.pc, hit->target, representative_kind(hit->kind));
    }
  }

  // The stack is updated in program order as each branch is identified.
  std::optional<Addr> ras_value;
  if (ev.kind == BranchKind::Return) ras_value = ras_.pop();
  const std::optional<Addr> ras_guess =
      ev.kind == BranchKind::Return ? ras_value : ras_.top();
  if (is_call(ev.kind)) ras_.push((ev.pc + kReturnAddressStride) & kAddrMask);

  bool correct = false;
  if (hit) {
    if (hit->alias && measured) ++report_.false_hits;
    predicted_taken = hit->kind == KindCode::Conditional ? ev.taken : true;
    const auto target = hit->is_return ? ras_guess : std::optional<Addr>(hit->target);
    correct = ev.taken ? predicted_taken && target == ev.target : !predicted_taken;
    in.stage = target_known_at_decode(ev.kind) ? ResolveStage::Decode : ResolveStage::Execute;
    if (!correct && measured) ++report_.wrong_target_hits;
  } else {
    predicted_taken = false;
    correct = !ev.taken;
    if (measured) {
      ++report_.all_branch_misses;
      if (ev.taken) {
        ++report_.l2btb_misses;
      } else {
        ++report_.not_taken_misses;
      }
    }
    const bool decode_known = target_known_at_decode(ev.kind) ||
                              (ev.kind == BranchKind::Return && ras_value == ev.target);
    in.stage = decode_known ? ResolveStage::Decode : ResolveStage::Execute;
  }

  if (!correct) {
    in.mispredicted = true;
    in.btb_miss = !hit;
    wrong_path_ = true;
  }
  return in;
}

void FrontendSim::resolve(const Inst& inst) {
  flush_wrong_path();
  wrong_path_ = false;
  pred_ready_ = cycle_ + 1;

  const auto e = static_cast<std::size_t>(inst.event);
  const auto& ev = trace_[e];
  const bool measured = measured_event(e);
  if (ev.taken) {
    const auto report = l2_->insert(ev.pc, ev.target, ev.kind);
    l1_->insert(ev.pc, ev.target, ev.kind);
    if (measured) report_.evictions += report.count();
  }

  ResolutionRecord rec;
  rec.event = e;
  rec.kind = ev.kind;
  rec.btb_miss = inst.btb_miss;
  rec.stage = inst.stage;
  rec.predicted = inst.predicted;
  rec.dq_enter = inst.dq_enter;
  rec.dispatched = inst.dispatched;
  rec.resolved = cycle_;
  if (measured && inst.btb_miss) {
    auto& r = report_.resolution[kind_index(ev.kind)];
    ++r.count;
    r.fetch += rec.fetch();
    r.decode += rec.decode();
    r.execute += rec.execute();
  }
  if (log_resolutions_) resolution_log_.push_back(rec);
}

void FrontendSim::flush_wrong_path() {
  while (!rob_.empty() && rob_.back().inst.wrong_path) rob_.pop_back();
  while (!decode_queue_.empty() && decode_queue_.back().wrong_path) {
    decode_queue_.pop_back();
  }
  while (!ftq_insts_.empty() && ftq_insts_.back().wrong_path) {
    ftq_insts_.pop_back();
    if (--ftq_.back().remaining == 0) ftq_.pop_back();
  }
}

void FrontendSim::take_census() {
  ++report_.census_samples;
  report_.census_sum += l2_->resident_branches();
}

MetricsReport FrontendSim::run(std::uint64_t warmup, std::uint64_t measure) {
  if (warmup + measure > trace_.size()) {
    throw std::invalid_argument(fmt::format(
        "warmup {} + measure {} exceeds trace length {}", warmup, measure, trace_.size()));
  }
  report_ = MetricsReport{};
  if (measure == 0) return report_;

  window_begin_ = warmup;
  window_end_ = warmup + measure;
  measuring_ = warmup == 0;
  count_from_cycle_ = 0;
  last_progress_cycle_ = cycle_;
  while (!finished_) {
    step_cycle();
    if (cycle_ - last_progress_cycle_ > kStallLimit) {
      throw std::logic_error(fmt::format("front-end stalled at cycle {}", cycle_));
    }
  }
  report_.cycles = stop_cycle_ + 1 - count_from_cycle_;
  if (report_.census_samples == 0) take_census();
  return report_;
}

}  // namespace btbsim
