#ifndef BTBSIM_TRACE_IO_HPP
#define BTBSIM_TRACE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "btbsim/trace.hpp"

namespace btbsim {

// Binary ".btr" layout: the 8-byte magic below, then 24-byte little-endian
// records {pc:8, target:8, gap:4, kind:1, taken:1, reserved:2}.
inline constexpr std::string_view kTraceMagic = "BTBTRC01";
inline constexpr std::size_t kTraceHeaderBytes = 8;
inline constexpr std::size_t kTraceRecordBytes = 24;

std::vector<TraceEvent> read_trace(std::istream& in);
void write_trace(std::span<const TraceEvent> events, std::ostream& out);

// Text ".btt" layout, one event per line:
//   <hex pc> <decimal gap> <kind name> <T|N> <hex target>
// Blank lines and lines starting with '#' are skipped.
std::vector<TraceEvent> read_trace_text(std::istream& in);
void write_trace_text(std::span<const TraceEvent> events, std::ostream& out);

/// Picks the text format for ".btt" paths and the binary format otherwise.
std::vector<TraceEvent> load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path,
                std::span<const TraceEvent> events);

}  // namespace btbsim

#endif  // BTBSIM_TRACE_IO_HPP
