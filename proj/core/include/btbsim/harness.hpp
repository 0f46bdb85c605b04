#ifndef BTBSIM_HARNESS_HPP
#define BTBSIM_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "btbsim/btb.hpp"
#include "btbsim/config.hpp"
#include "btbsim/frontend.hpp"
#include "btbsim/metrics.hpp"
#include "btbsim/trace.hpp"

namespace btbsim {

/// User-facing description of one L2 BTB organization. `entries` and `ways`
/// are translated into the geometry of each family by to_spec().
struct OrgParams {
  std::string type = "baseline";  // baseline|skewed|mbtb|fdipx|ideal
  std::uint64_t entries = 8192;
  std::uint64_t ways = 4;
  unsigned latency = 2;
  unsigned variants = 2;
  bool skewed = true;
  bool compressed = true;
  std::vector<FdipxTable> tables = FdipxSpec{}.tables;

  /// Throws ConfigError on an unknown type or a geometry the family cannot
  /// build (e.g. MBTB banks are fixed at four, so ways must be 4).
  BtbSpec to_spec() const;
};

struct NamedOrg {
  std::string name;
  OrgParams params;
};

struct SweepSpec {
  std::string org;   // name of the org the axis applies to
  std::string axis;  // entries|ways|latency|variants
  std::vector<std::uint64_t> values;
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> traces;
  FrontendConfig frontend;
  std::vector<NamedOrg> orgs;
  std::optional<SweepSpec> sweep;
  std::uint64_t warmup = 100'000;
  /// Defaults to the rest of the trace after warmup.
  std::optional<std::uint64_t> measure;
  std::uint64_t seed = 1;
  std::filesystem::path out;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  /// Throws ConfigError when no org is given, names repeat, or the sweep
  /// refers to an unknown org or axis.
  void validate() const;
};

/// Parses the experiment file grammar (see README). Relative trace paths are
/// resolved against `base_dir`.
ExperimentConfig parse_experiment_config(const KeyValueFile& file,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical text form of the effective configuration; its FNV-1a hash is
/// the `config=` value in result headers.
std::string effective_config_text(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

struct ResultRow {
  std::string trace;
  std::string org;
  std::string descriptor;
  std::string point;
  std::uint64_t storage_bits = 0;
  MetricsReport metrics;

  double storage_kb() const { return btbsim::storage_kb(storage_bits); }
};

/// One simulation: fresh front-end with `l2` as the last-level BTB.
MetricsReport run_point(std::span<const TraceEvent> trace,
                        const FrontendConfig& frontend, const BtbSpec& l2,
                        std::uint64_t seed, std::uint64_t warmup,
                        std::optional<std::uint64_t> measure);

/// One row per (trace, org, sweep point), in configuration order. Points run
/// concurrently, one simulator per point.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Same, over traces already in memory, named by `trace_ids`.
std::vector<ResultRow> run_experiment(
    const ExperimentConfig& config,
    std::span<const std::vector<TraceEvent>> traces,
    std::span<const std::string> trace_ids);

/// CSV column names, in order.
std::vector<std::string> result_columns();
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows,
                       std::uint64_t seed, std::uint64_t hash);

struct OffsetRow {
  BranchKind kind;
  unsigned width;
  double cumulative_fraction;
};

/// For each kind present, the fraction of its dynamic branches whose offset
/// magnitude fits in w bits, w = 1..57. Empty trace, empty table.
std::vector<OffsetRow> analyze_offsets(std::span<const TraceEvent> trace);
void write_offsets_csv(std::ostream& out, std::span<const OffsetRow> rows);

struct RankingSummary {
  std::string trace;
  std::vector<std::string> by_mpki;  // best (lowest) first
  std::vector<std::string> by_scki;
  /// True when no pair of orgs is ordered one way by MPKI and the other way
  /// by SCKI (ties are compatible with either order).
  bool rankings_agree = true;
  std::vector<std::pair<std::string, std::string>> disagreements;
};

struct OrgMeans {
  std::string label;
  std::size_t traces = 0;
  double mpki_arith = 0, mpki_geo = 0;
  double scki_arith = 0, scki_geo = 0;
  double ipc_arith = 0, ipc_geo = 0;
};

/// Rankings per trace, over the labels "org" or "org@point".
std::vector<RankingSummary> rank_rows(std::span<const ResultRow> rows);
/// Arithmetic and geometric means across traces per label. A zero value
/// makes the geometric mean zero.
std::vector<OrgMeans> mean_rows(std::span<const ResultRow> rows);
void write_summary(std::ostream& out, std::span<const RankingSummary> rankings,
                   std::span<const OrgMeans> means);

struct Comparison {
  std::vector<ResultRow> rows;
  RankingSummary summary;
};

/// Runs every org on one trace and ranks them. Needs at least two orgs.
Comparison compare_orgs(std::span<const TraceEvent> trace,
                        const std::string& trace_id,
                        std::span<const NamedOrg> orgs,
                        const FrontendConfig& frontend, std::uint64_t warmup,
                        std::optional<std::uint64_t> measure, std::uint64_t seed);

}  // namespace btbsim

#endif  // BTBSIM_HARNESS_HPP
