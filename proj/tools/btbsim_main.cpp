#include <btbsim/btb.hpp>
#include <btbsim/config.hpp>
#include <btbsim/harness.hpp>
#include <btbsim/synthetic.hpp>
#include <btbsim/trace_io.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace btbsim;

std::string format_kb(double kb) {
  std::string s = fmt::format("{:.2f}", kb);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s + " KB";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  return out;
}

// `run --config F` reads a [run] section whose keys are flag names. Flags
// given on the command line win; the rest are appended as if typed.
std::vector<std::string> expand_run_config(std::vector<std::string> args) {
  if (args.size() < 2 || args[1] != "run") return args;
  std::optional<std::string> path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    }
  }
  if (!path) return args;
  const auto file = KeyValueFile::load(*path);
  for (const auto& section : file.sections()) {
    if (section.name != "run") {
      throw ConfigError(fmt::format("{}: only a [run] section is allowed", *path));
    }
    for (const auto& [key, value] : section.entries) {
      if (key == "config") throw ConfigError("config files cannot nest --config");
      const std::string flag = "--" + key;
      bool given = false;
      for (const auto& a : args) given = given || a == flag || a.starts_with(flag + "=");
      if (!given) {
        args.push_back(flag);
        args.push_back(value);
      }
    }
  }
  return args;
}

struct RunOptions {
  std::string trace;
  std::string org;
  std::optional<std::uint64_t> entries;
  std::uint64_t ways = 4;
  unsigned latency = 2;
  unsigned variants = 2;
  std::uint64_t warmup = 100'000;
  std::optional<std::uint64_t> measure;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  unsigned threads = 0;
};

OrgParams org_params(const std::string& org, std::optional<std::uint64_t> entries,
                     std::uint64_t ways, unsigned latency, unsigned variants) {
  OrgParams p;
  p.type = org;
  p.entries = entries.value_or(org == "mbtb" ? 4096 : 8192);
  p.ways = ways;
  for (auto& t : p.tables) t.ways = ways;
  p.latency = latency;
  p.variants = variants;
  return p;
}

int cmd_run(const RunOptions& o) {
  ExperimentConfig cfg;
  cfg.traces = {o.trace};
  cfg.orgs = {{o.org, org_params(o.org, o.entries, o.ways, o.latency, o.variants)}};
  cfg.warmup = o.warmup;
  cfg.measure = o.measure;
  cfg.seed = o.seed;
  cfg.out = o.out;
  cfg.threads = o.threads;
  cfg.validate();
  std::cerr << effective_config_text(cfg);

  const auto rows = run_experiment(cfg);
  if (o.out.empty()) {
    write_results_csv(std::cout, rows, cfg.seed, config_hash(cfg));
  } else {
    auto out = open_out(o.out);
    write_results_csv(out, rows, cfg.seed, config_hash(cfg));
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, unsigned threads) {
  auto cfg = load_experiment_config(config_path);
  if (!out_path.empty()) cfg.out = out_path;
  if (threads != 0) cfg.threads = threads;
  if (cfg.out.empty()) throw ConfigError("sweep needs --out or [experiment] out");
  if (cfg.traces.empty()) throw ConfigError("[experiment] traces is empty");
  std::cerr << effective_config_text(cfg);

  const auto rows = run_experiment(cfg);
  auto out = open_out(cfg.out.string());
  write_results_csv(out, rows, cfg.seed, config_hash(cfg));
  if (cfg.orgs.size() > 1 || cfg.sweep) {
    write_summary(std::cout, rank_rows(rows), mean_rows(rows));
  }
  return 0;
}

int cmd_gen_trace(const std::string& spec_path, const std::string& out_path,
                  std::optional<std::uint64_t> seed, std::optional<std::uint64_t> events) {
  auto spec = load_synthetic_spec(spec_path);
  if (seed) spec.seed = *seed;
  if (events) spec.event_count = *events;
  std::cerr << synthetic_spec_text(spec);
  const auto trace = gen_synthetic(spec);
  save_trace(out_path, trace);
  return 0;
}

int cmd_analyze(const std::string& trace_path, const std::string& out_path) {
  std::cerr << fmt::format("trace = {}\n", trace_path);
  const auto rows = analyze_offsets(load_trace(trace_path));
  if (out_path.empty()) {
    write_offsets_csv(std::cout, rows);
  } else {
    auto out = open_out(out_path);
    write_offsets_csv(out, rows);
  }
  return 0;
}

int cmd_storage(const std::string& org, std::optional<std::uint64_t> entries,
                std::uint64_t ways, unsigned variants) {
  const auto params = org_params(org, entries, ways, 2, variants);
  const auto spec = params.to_spec();
  std::cerr << fmt::format("org = {}\nentries = {}\nways = {}\nvariants = {}\n", org,
                           params.entries, ways, variants);
  const auto bits = storage_bits(spec.org);
  fmt::print("{}\n", format_kb(storage_kb(bits)));
  if (org == "fdipx") {
    fmt::print("note: {} bits summed over tables; the commonly quoted total is {} KB\n", bits,
               kFdipxTableReportedKb);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven BTB and decoupled front-end simulator"};
  app.require_subcommand(1);
  const std::vector<std::string> orgs = {"baseline", "skewed", "mbtb", "fdipx", "ideal"};

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one organization on one trace");
  run_cmd->add_option("--trace", run.trace, "Trace file (.btr or .btt)")->required();
  run_cmd->add_option("--org", run.org, "L2 BTB organization")
      ->required()
      ->check(CLI::IsMember(orgs));
  run_cmd->add_option("--entries", run.entries, "Total entries (default 8192, mbtb 4096)");
  run_cmd->add_option("--ways", run.ways, "Associativity")->capture_default_str();
  run_cmd->add_option("--latency", run.latency, "L2 BTB access latency in cycles")
      ->capture_default_str();
  run_cmd->add_option("--variants", run.variants, "MBTB entry variants")
      ->check(CLI::IsMember({2u, 3u, 4u}))
      ->capture_default_str();
  run_cmd->add_option("--warmup", run.warmup, "Warmup branches")->capture_default_str();
  run_cmd->add_option("--measure", run.measure, "Measured branches (default: rest)");
  run_cmd->add_option("--seed", run.seed, "Random seed")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Result CSV (default stdout)");
  run_cmd->add_option("--config", run.config, "File with a [run] section of flag values");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)");

  std::string sweep_config, sweep_out;
  unsigned sweep_threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment file");
  sweep_cmd->add_option("--config", sweep_config, "Experiment file")->required();
  sweep_cmd->add_option("--out", sweep_out, "Result CSV (overrides [experiment] out)");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");

  std::string gen_spec, gen_out;
  std::optional<std::uint64_t> gen_seed, gen_events;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Generate a synthetic trace");
  gen_cmd->add_option("--spec", gen_spec, "[synthetic] spec file")->required();
  gen_cmd->add_option("--out", gen_out, "Output trace (.btr or .btt)")->required();
  gen_cmd->add_option("--seed", gen_seed, "Override the spec seed");
  gen_cmd->add_option("--events", gen_events, "Override the spec event_count");

  std::string an_trace, an_out;
  auto* an_cmd = app.add_subcommand("analyze-offsets", "Per-kind offset width CDF");
  an_cmd->add_option("--trace", an_trace, "Trace file")->required();
  an_cmd->add_option("--out", an_out, "Output CSV (default stdout)");

  std::string st_org;
  std::optional<std::uint64_t> st_entries;
  std::uint64_t st_ways = 4;
  unsigned st_variants = 2;
  auto* st_cmd = app.add_subcommand("storage", "Print analytic storage");
  st_cmd->add_option("--org", st_org, "Organization")->required()->check(CLI::IsMember(orgs));
  st_cmd->add_option("--entries", st_entries, "Total entries");
  st_cmd->add_option("--ways", st_ways, "Associativity")->capture_default_str();
  st_cmd->add_option("--variants", st_variants, "MBTB entry variants")
      ->check(CLI::IsMember({2u, 3u, 4u}))
      ->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_run_config(std::move(args));
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep_config, sweep_out, sweep_threads);
    if (*gen_cmd) return cmd_gen_trace(gen_spec, gen_out, gen_seed, gen_events);
    if (*an_cmd) return cmd_analyze(an_trace, an_out);
    if (*st_cmd) return cmd_storage(st_org, st_entries, st_ways, st_variants);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
