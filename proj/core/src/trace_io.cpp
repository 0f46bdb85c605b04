#include "btbsim/trace_io.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace btbsim {

namespace {

void put_le(std::uint8_t* dst, std::uint64_t value, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) {
    dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
}

std::uint64_t get_le(const std::uint8_t* src, std::size_t bytes) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    value |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  }
  return value;
}

TraceEvent decode_record(const std::array<std::uint8_t, kTraceRecordBytes>& r) {
  TraceEvent e;
  e.pc = get_le(r.data(), 8);
  e.target = get_le(r.data() + 8, 8);
  e.gap = static_cast<std::uint32_t>(get_le(r.data() + 16, 4));
  const std::uint8_t kind = r[20];
  const std::uint8_t taken = r[21];
  if (e.pc >= kAddrLimit || e.target >= kAddrLimit) {
    throw TraceError("address out of range");
  }
  if (kind >= kBranchKindCount) throw TraceError("unknown kind code");
  if (taken > 1) throw TraceError("bad taken flag");
  if (r[22] != 0 || r[23] != 0) throw TraceError("nonzero reserved bytes");
  e.kind = static_cast<BranchKind>(kind);
  e.taken = taken != 0;
  return e;
}

std::optional<Addr> parse_hex(std::string_view s) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  Addr value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::vector<TraceEvent> read_trace(std::istream& in) {
  std::array<char, kTraceHeaderBytes> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kTraceMagic) {
    throw TraceError("bad magic");
  }
  std::vector<TraceEvent> events;
  std::array<std::uint8_t, kTraceRecordBytes> record{};
  while (true) {
    in.read(reinterpret_cast<char*>(record.data()), record.size());
    const auto got = in.gcount();
    if (got == 0) break;
    if (got != static_cast<std::streamsize>(record.size())) {
      throw TraceError("truncated record");
    }
    events.push_back(decode_record(record));
  }
  if (in.bad()) throw TraceError("read failure");
  return events;
}

void write_trace(std::span<const TraceEvent> events, std::ostream& out) {
  out.write(kTraceMagic.data(), kTraceMagic.size());
  std::array<std::uint8_t, kTraceRecordBytes> record{};
  for (const auto& e : events) {
    validate_event(e);
    record.fill(0);
    put_le(record.data(), e.pc, 8);
    put_le(record.data() + 8, e.target, 8);
    put_le(record.data() + 16, e.gap, 4);
    record[20] = static_cast<std::uint8_t>(e.kind);
    record[21] = e.taken ? 1 : 0;
    out.write(reinterpret_cast<const char*>(record.data()), record.size());
  }
  if (!out) throw TraceError("write failure");
}

std::vector<TraceEvent> read_trace_text(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string pc, gap, kind, dir, target;
    if (!(fields >> pc) || pc.starts_with('#')) continue;
    if (!(fields >> gap >> kind >> dir >> target)) {
      throw TraceError(fmt::format("line {}: truncated record", line_no));
    }
    TraceEvent e;
    const auto pc_value = parse_hex(pc);
    const auto target_value = parse_hex(target);
    if (!pc_value || !target_value) {
      throw TraceError(fmt::format("line {}: bad address", line_no));
    }
    e.pc = *pc_value;
    e.target = *target_value;
    auto [ptr, ec] =
        std::from_chars(gap.data(), gap.data() + gap.size(), e.gap, 10);
    if (ec != std::errc{} || ptr != gap.data() + gap.size()) {
      throw TraceError(fmt::format("line {}: bad gap", line_no));
    }
    const auto k = kind_from_name(kind);
    if (!k) throw TraceError(fmt::format("line {}: unknown kind code", line_no));
    e.kind = *k;
    if (dir != "T" && dir != "N") {
      throw TraceError(fmt::format("line {}: bad direction", line_no));
    }
    e.taken = dir == "T";
    if (e.pc >= kAddrLimit || e.target >= kAddrLimit) {
      throw TraceError("address out of range");
    }
    events.push_back(e);
  }
  return events;
}

void write_trace_text(std::span<const TraceEvent> events, std::ostream& out) {
  for (const auto& e : events) {
    validate_event(e);
    out << fmt::format("{:#x} {} {} {} {:#x}\n", e.pc, e.gap, kind_name(e.kind),
                       e.taken ? 'T' : 'N', e.target);
  }
  if (!out) throw TraceError("write failure");
}

std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
  const bool text = path.extension() == ".btt";
  std::ifstream in(path, text ? std::ios::in : std::ios::binary);
  if (!in) throw TraceError(fmt::format("cannot open trace '{}'", path.string()));
  return text ? read_trace_text(in) : read_trace(in);
}

void save_trace(const std::filesystem::path& path,
                std::span<const TraceEvent> events) {
  const bool text = path.extension() == ".btt";
  std::ofstream out(path, text ? std::ios::out : std::ios::binary);
  if (!out) throw TraceError(fmt::format("cannot write '{}'", path.string()));
  if (text) {
    write_trace_text(events, out);
  } else {
    write_trace(events, out);
  }
}

}  // namespace btbsim
