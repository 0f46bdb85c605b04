#include "btbsim/harness.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "btbsim/trace_io.hpp"

namespace btbsim {

namespace {

const std::set<std::string> kOrgTypes = {"baseline", "skewed", "mbtb", "fdipx", "ideal"};
const std::set<std::string> kAxes = {"entries", "ways", "latency", "variants"};

std::vector<FdipxTable> parse_tables(std::string_view text, std::uint64_t ways) {
  std::vector<FdipxTable> tables;
  for (const auto& item : split_list(text)) {
    const auto parts = split_list(item, '/');
    if (parts.size() != 3) {
      throw ConfigError(fmt::format(
          "fdipx table '{}': expected entries/offset_bits/bits_per_entry", item));
    }
    FdipxTable t;
    t.entries = parse_uint(parts[0], "fdipx entries");
    t.offset_bits = static_cast<unsigned>(parse_uint(parts[1], "fdipx offset_bits"));
    t.bits_per_entry = static_cast<unsigned>(parse_uint(parts[2], "fdipx bits_per_entry"));
    t.ways = ways;
    tables.push_back(t);
  }
  if (tables.empty()) throw ConfigError("fdipx: tables list is empty");
  return tables;
}

std::string format_tables(const std::vector<FdipxTable>& tables) {
  std::string out;
  for (const auto& t : tables) {
    if (!out.empty()) out += ", ";
    out += fmt::format("{}/{}/{}", t.entries, t.offset_bits, t.bits_per_entry);
  }
  return out;
}

bool axis_applies(const std::string& type, const std::string& axis) {
  if (axis == "latency") return true;
  if (axis == "entries") return type == "baseline" || type == "skewed" || type == "mbtb";
  if (axis == "ways") return type == "baseline" || type == "skewed" || type == "fdipx";
  if (axis == "variants") return type == "mbtb";
  return false;
}

void apply_axis(OrgParams& p, const std::string& axis, std::uint64_t value) {
  if (axis == "entries") {
    p.entries = value;
  } else if (axis == "ways") {
    p.ways = value;
    for (auto& t : p.tables) t.ways = value;
  } else if (axis == "latency") {
    p.latency = static_cast<unsigned>(value);
  } else if (axis == "variants") {
    p.variants = static_cast<unsigned>(value);
  }
}

struct Job {
  std::size_t trace;
  std::size_t org;
  std::string point;
  BtbSpec spec;
};

std::string format_double(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

BtbSpec OrgParams::to_spec() const {
  auto divide = [&](std::uint64_t by) {
    if (by == 0 || entries == 0 || entries % by != 0) {
      throw ConfigError(fmt::format("{}: entries {} not divisible by {}", type, entries, by));
    }
    return static_cast<std::size_t>(entries / by);
  };
  BtbSpec spec;
  spec.latency = latency;
  if (type == "baseline") {
    spec.org = BaselineSpec{divide(ways), static_cast<std::size_t>(ways), 32, std::nullopt};
  } else if (type == "skewed") {
    spec.org = SkewedSpec{divide(ways), static_cast<std::size_t>(ways), 32};
  } else if (type == "mbtb") {
    if (ways != 4) throw ConfigError("mbtb: ways is fixed at 4 banks");
    spec.org = MbtbSpec{divide(4), variants, skewed, compressed};
  } else if (type == "fdipx") {
    FdipxSpec f;
    f.tables = tables;
    spec.org = f;
  } else if (type == "ideal") {
    spec.org = IdealSpec{};
  } else {
    throw ConfigError(fmt::format("unknown org type '{}'", type));
  }
  try {
    validate(spec.org);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (orgs.empty()) throw ConfigError("experiment needs at least one org");
  std::set<std::string> names;
  for (const auto& o : orgs) {
    if (!names.insert(o.name).second) {
      throw ConfigError(fmt::format("org '{}' defined twice", o.name));
    }
    o.params.to_spec();
  }
  if (sweep) {
    const auto it = std::find_if(orgs.begin(), orgs.end(),
                                 [&](const NamedOrg& o) { return o.name == sweep->org; });
    if (it == orgs.end()) {
      throw ConfigError(fmt::format("sweep: unknown org '{}'", sweep->org));
    }
    if (!kAxes.count(sweep->axis)) {
      throw ConfigError(fmt::format("sweep: unknown axis '{}'", sweep->axis));
    }
    if (!axis_applies(it->params.type, sweep->axis)) {
      throw ConfigError(fmt::format("sweep: axis '{}' is not supported for {}", sweep->axis,
                                    it->params.type));
    }
    if (sweep->values.empty()) throw ConfigError("sweep: values list is empty");
    for (const auto v : sweep->values) {
      auto p = it->params;
      apply_axis(p, sweep->axis, v);
      p.to_spec();
    }
  }
  frontend.validate();
}

ExperimentConfig parse_experiment_config(const KeyValueFile& file,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  for (const auto& section : file.sections()) {
    const std::string& name = section.name;
    if (name == "experiment") {
      section.reject_unknown({"traces", "warmup", "measure", "seed", "out", "threads"});
      if (auto t = section.get("traces")) {
        for (const auto& item : split_list(*t)) {
          std::filesystem::path p(item);
          cfg.traces.push_back(p.is_absolute() ? p : base_dir / p);
        }
      }
      cfg.warmup = section.get_uint("warmup", cfg.warmup);
      if (auto m = section.get("measure"); m && trim(*m) != "rest") {
        cfg.measure = parse_uint(*m, "[experiment] measure");
      }
      cfg.seed = section.get_uint("seed", cfg.seed);
      if (auto o = section.get("out")) {
        std::filesystem::path p(trim(*o));
        cfg.out = p.is_absolute() ? p : base_dir / p;
      }
      cfg.threads = static_cast<unsigned>(section.get_uint("threads", 0));
    } else if (name == "frontend") {
      section.reject_unknown({"ftq_blocks", "instrs_per_block", "fetch_width", "decode_queue",
                              "decode_width", "dispatch_width", "retire_width", "rob_size",
                              "l1i_latency", "l1btb_sets", "l1btb_ways", "l1btb_latency",
                              "ras_depth", "execute_delay", "census_interval"});
      auto& f = cfg.frontend;
      f.ftq_blocks = section.get_uint("ftq_blocks", f.ftq_blocks);
      f.instrs_per_block = section.get_uint("instrs_per_block", f.instrs_per_block);
      f.fetch_width = section.get_uint("fetch_width", f.fetch_width);
      f.decode_queue = section.get_uint("decode_queue", f.decode_queue);
      f.decode_width = section.get_uint("decode_width", f.decode_width);
      f.dispatch_width = section.get_uint("dispatch_width", f.dispatch_width);
      f.retire_width = section.get_uint("retire_width", f.retire_width);
      f.rob_size = section.get_uint("rob_size", f.rob_size);
      f.l1i_latency = static_cast<unsigned>(section.get_uint("l1i_latency", f.l1i_latency));
      auto l1 = std::get<BaselineSpec>(f.l1btb.org);
      l1.sets = section.get_uint("l1btb_sets", l1.sets);
      l1.ways = section.get_uint("l1btb_ways", l1.ways);
      f.l1btb.org = l1;
      f.l1btb.latency = static_cast<unsigned>(section.get_uint("l1btb_latency", f.l1btb.latency));
      f.ras_depth = section.get_uint("ras_depth", f.ras_depth);
      f.execute_resolve_delay =
          static_cast<unsigned>(section.get_uint("execute_delay", f.execute_resolve_delay));
      f.census_interval = section.get_uint("census_interval", f.census_interval);
    } else if (name.starts_with("org:")) {
      section.reject_unknown({"type", "entries", "ways", "latency", "variants", "skewed",
                              "compressed", "tables"});
      NamedOrg org;
      org.name = trim(std::string_view(name).substr(4));
      if (org.name.empty()) throw ConfigError("org section needs a name: [org:NAME]");
      auto& p = org.params;
      p.type = trim(section.require("type"));
      if (!kOrgTypes.count(p.type)) {
        throw ConfigError(fmt::format("[{}]: unknown type '{}'", name, p.type));
      }
      p.entries = section.get_uint("entries", p.type == "mbtb" ? 4096 : p.entries);
      p.ways = section.get_uint("ways", p.ways);
      p.latency = static_cast<unsigned>(section.get_uint("latency", p.latency));
      p.variants = static_cast<unsigned>(section.get_uint("variants", p.variants));
      p.skewed = section.get_bool("skewed", p.skewed);
      p.compressed = section.get_bool("compressed", p.compressed);
      for (auto& t : p.tables) t.ways = p.ways;
      if (auto t = section.get("tables")) p.tables = parse_tables(*t, p.ways);
      cfg.orgs.push_back(std::move(org));
    } else if (name == "sweep") {
      section.reject_unknown({"org", "axis", "values"});
      SweepSpec s;
      s.org = trim(section.require("org"));
      s.axis = trim(section.require("axis"));
      for (const auto& v : split_list(section.require("values"))) {
        s.values.push_back(parse_uint(v, "[sweep] values"));
      }
      cfg.sweep = std::move(s);
    } else {
      throw ConfigError(fmt::format("unknown section [{}]", name));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(KeyValueFile::load(path), path.parent_path());
}

std::string effective_config_text(const ExperimentConfig& cfg) {
  std::string out = "[experiment]\n";
  std::string traces;
  for (const auto& t : cfg.traces) {
    if (!traces.empty()) traces += ", ";
    traces += t.string();
  }
  out += fmt::format("traces = {}\nwarmup = {}\nmeasure = {}\nseed = {}\n", traces, cfg.warmup,
                     cfg.measure ? std::to_string(*cfg.measure) : std::string("rest"),
                     cfg.seed);
  const auto& f = cfg.frontend;
  const auto& l1 = std::get<BaselineSpec>(f.l1btb.org);
  out += fmt::format(
      "\n[frontend]\nftq_blocks = {}\ninstrs_per_block = {}\nfetch_width = {}\n"
      "decode_queue = {}\ndecode_width = {}\ndispatch_width = {}\nretire_width = {}\n"
      "rob_size = {}\nl1i_latency = {}\nl1btb_sets = {}\nl1btb_ways = {}\n"
      "l1btb_latency = {}\nras_depth = {}\nexecute_delay = {}\ncensus_interval = {}\n",
      f.ftq_blocks, f.instrs_per_block, f.fetch_width, f.decode_queue, f.decode_width,
      f.dispatch_width, f.retire_width, f.rob_size, f.l1i_latency, l1.sets, l1.ways,
      f.l1btb.latency, f.ras_depth, f.execute_resolve_delay, f.census_interval);
  for (const auto& o : cfg.orgs) {
    const auto& p = o.params;
    out += fmt::format("\n[org:{}]\ntype = {}\n", o.name, p.type);
    if (p.type == "baseline" || p.type == "skewed") {
      out += fmt::format("entries = {}\nways = {}\n", p.entries, p.ways);
    } else if (p.type == "mbtb") {
      out += fmt::format("entries = {}\nvariants = {}\nskewed = {}\ncompressed = {}\n",
                         p.entries, p.variants, p.skewed, p.compressed);
    } else if (p.type == "fdipx") {
      out += fmt::format("ways = {}\ntables = {}\n", p.ways, format_tables(p.tables));
    }
    out += fmt::format("latency = {}\n", p.latency);
  }
  if (cfg.sweep) {
    out += fmt::format("\n[sweep]\norg = {}\naxis = {}\nvalues = {}\n", cfg.sweep->org,
                       cfg.sweep->axis, fmt::join(cfg.sweep->values, ", "));
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a64(effective_config_text(config));
}

MetricsReport run_point(std::span<const TraceEvent> trace, const FrontendConfig& frontend,
                        const BtbSpec& l2, std::uint64_t seed, std::uint64_t warmup,
                        std::optional<std::uint64_t> measure) {
  if (warmup > trace.size()) {
    throw std::invalid_argument(
        fmt::format("warmup {} exceeds trace length {}", warmup, trace.size()));
  }
  FrontendConfig fc = frontend;
  fc.l2btb = l2;
  fc.seed = seed;
  FrontendSim sim(fc, trace);
  return sim.run(warmup, measure.value_or(trace.size() - warmup));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<std::vector<TraceEvent>> traces;
  std::vector<std::string> ids;
  for (const auto& path : config.traces) {
    traces.push_back(load_trace(path));
    ids.push_back(path.stem().string());
  }
  return run_experiment(config, traces, ids);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      std::span<const std::vector<TraceEvent>> traces,
                                      std::span<const std::string> trace_ids) {
  config.validate();
  if (traces.size() != trace_ids.size()) {
    throw std::invalid_argument("trace and id counts differ");
  }
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    for (std::size_t o = 0; o < config.orgs.size(); ++o) {
      const auto& org = config.orgs[o];
      if (config.sweep && config.sweep->org == org.name) {
        for (const auto v : config.sweep->values) {
          auto p = org.params;
          apply_axis(p, config.sweep->axis, v);
          jobs.push_back({t, o, fmt::format("{}={}", config.sweep->axis, v), p.to_spec()});
        }
      } else {
        jobs.push_back({t, o, "default", org.params.to_spec()});
      }
    }
  }

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& job = jobs[i];
        auto& row = rows[i];
        row.trace = trace_ids[job.trace];
        row.org = config.orgs[job.org].name;
        row.descriptor = describe(job.spec.org);
        row.point = job.point;
        row.storage_bits = storage_bits(job.spec.org);
        row.metrics = run_point(traces[job.trace], config.frontend, job.spec, config.seed,
                                config.warmup, config.measure);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<std::string> result_columns() {
  std::vector<std::string> cols = {
      "trace",     "org",          "descriptor",   "point",
      "storage_kb", "mpki",        "scki",         "ipc_proxy",
      "resident_branches_mean", "evictions", "false_hits", "cycles",
      "retired",   "l2btb_misses", "not_taken_misses", "starved_cycles"};
  for (const auto kind : kAllBranchKinds) {
    for (const char* part : {"count", "fetch", "decode", "execute"}) {
      cols.push_back(fmt::format("res_{}_{}", kind_name(kind), part));
    }
  }
  return cols;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows, std::uint64_t seed,
                       std::uint64_t hash) {
  fmt::print(out, "# seed={} config={:016x}\n", seed, hash);
  fmt::print(out, "{}\n", fmt::join(result_columns(), ","));
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.trace, r.org,
               r.descriptor, r.point, r.storage_kb(), format_double(m.mpki()),
               format_double(m.scki()), format_double(m.ipc_proxy()),
               format_double(m.resident_branches_mean()), m.evictions, m.false_hits, m.cycles,
               m.retired, m.l2btb_misses, m.not_taken_misses, m.starved_cycles);
    for (const auto& res : m.resolution) {
      fmt::print(out, ",{},{},{},{}", res.count, res.fetch, res.decode, res.execute);
    }
    out << '\n';
  }
}

std::vector<OffsetRow> analyze_offsets(std::span<const TraceEvent> trace) {
  std::vector<OffsetRow> rows;
  const auto stats = trace_stats(trace);
  for (const auto kind : kAllBranchKinds) {
    const auto k = kind_index(kind);
    const auto total = stats.dynamic[k];
    if (total == 0) continue;
    std::uint64_t running = 0;
    for (unsigned w = 1; w <= kAddrBits; ++w) {
      running += stats.width_hist[k][w];
      rows.push_back({kind, w, static_cast<double>(running) / static_cast<double>(total)});
    }
  }
  return rows;
}

void write_offsets_csv(std::ostream& out, std::span<const OffsetRow> rows) {
  out << "kind,width,cumulative_fraction\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{}\n", kind_name(r.kind), r.width, format_double(r.cumulative_fraction));
  }
}

namespace {

std::string label_of(const ResultRow& r) {
  return r.point == "default" ? r.org : r.org + "@" + r.point;
}

RankingSummary rank_group(const std::string& trace, std::vector<const ResultRow*> group) {
  RankingSummary s;
  s.trace = trace;
  auto ranked = [&](auto metric) {
    auto g = group;
    std::stable_sort(g.begin(), g.end(), [&](const ResultRow* a, const ResultRow* b) {
      return metric(*a) < metric(*b);
    });
    std::vector<std::string> labels;
    for (const auto* r : g) labels.push_back(label_of(*r));
    return labels;
  };
  s.by_mpki = ranked([](const ResultRow& r) { return r.metrics.mpki(); });
  s.by_scki = ranked([](const ResultRow& r) { return r.metrics.scki(); });
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      const auto& a = group[i]->metrics;
      const auto& b = group[j]->metrics;
      const bool discordant = (a.mpki() < b.mpki() && a.scki() > b.scki()) ||
                              (a.mpki() > b.mpki() && a.scki() < b.scki());
      if (discordant) {
        s.rankings_agree = false;
        s.disagreements.emplace_back(label_of(*group[i]), label_of(*group[j]));
      }
    }
  }
  return s;
}

double geo_mean(const std::vector<double>& xs) {
  double acc = 0;
  for (const double x : xs) {
    if (x <= 0) return 0;
    acc += std::log(x);
  }
  return xs.empty() ? 0 : std::exp(acc / static_cast<double>(xs.size()));
}

double arith_mean(const std::vector<double>& xs) {
  double acc = 0;
  for (const double x : xs) acc += x;
  return xs.empty() ? 0 : acc / static_cast<double>(xs.size());
}

}  // namespace

std::vector<RankingSummary> rank_rows(std::span<const ResultRow> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.trace)) order.push_back(r.trace);
    groups[r.trace].push_back(&r);
  }
  std::vector<RankingSummary> out;
  for (const auto& t : order) out.push_back(rank_group(t, groups[t]));
  return out;
}

std::vector<OrgMeans> mean_rows(std::span<const ResultRow> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    const auto label = label_of(r);
    if (!groups.count(label)) order.push_back(label);
    groups[label].push_back(&r);
  }
  std::vector<OrgMeans> out;
  for (const auto& label : order) {
    std::vector<double> mpki, scki, ipc;
    for (const auto* r : groups[label]) {
      mpki.push_back(r->metrics.mpki());
      scki.push_back(r->metrics.scki());
      ipc.push_back(r->metrics.ipc_proxy());
    }
    out.push_back({label, mpki.size(), arith_mean(mpki), geo_mean(mpki), arith_mean(scki),
                   geo_mean(scki), arith_mean(ipc), geo_mean(ipc)});
  }
  return out;
}

void write_summary(std::ostream& out, std::span<const RankingSummary> rankings,
                   std::span<const OrgMeans> means) {
  for (const auto& s : rankings) {
    fmt::print(out, "trace {}\n  mpki ranking: {}\n  scki ranking: {}\n  rankings agree: {}\n",
               s.trace, fmt::join(s.by_mpki, " < "), fmt::join(s.by_scki, " < "),
               s.rankings_agree ? "yes" : "no");
    for (const auto& [a, b] : s.disagreements) {
      fmt::print(out, "  disagreement: {} vs {}\n", a, b);
    }
  }
  out << "label,traces,mpki_arith_mean,mpki_geo_mean,scki_arith_mean,scki_geo_mean,"
         "ipc_arith_mean,ipc_geo_mean\n";
  for (const auto& m : means) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", m.label, m.traces, format_double(m.mpki_arith),
               format_double(m.mpki_geo), format_double(m.scki_arith), format_double(m.scki_geo),
               format_double(m.ipc_arith), format_double(m.ipc_geo));
  }
}

Comparison compare_orgs(std::span<const TraceEvent> trace, const std::string& trace_id,
                        std::span<const NamedOrg> orgs, const FrontendConfig& frontend,
                        std::uint64_t warmup, std::optional<std::uint64_t> measure,
                        std::uint64_t seed) {
  if (orgs.size() < 2) throw std::invalid_argument("compare_orgs needs at least two orgs");
  ExperimentConfig cfg;
  cfg.frontend = frontend;
  cfg.orgs.assign(orgs.begin(), orgs.end());
  cfg.warmup = warmup;
  cfg.measure = measure;
  cfg.seed = seed;
  const std::vector<std::vector<TraceEvent>> traces = {{trace.begin(), trace.end()}};
  const std::vector<std::string> ids = {trace_id};
  Comparison c;
  c.rows = run_experiment(cfg, traces, ids);
  c.summary = rank_rows(c.rows).front();
  return c;
}

}  // namespace btbsim
