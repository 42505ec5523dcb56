#include "calib/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "calib/harness.hpp"
#include "calib/parallel.hpp"

namespace calib {

namespace fs = std::filesystem;

namespace {

struct RefusedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string spec_file;
  std::string out_dir;
  std::string real_file;
  std::string grid_file;
  std::string strategy;
  std::size_t jobs = 0;
  bool force = false;
  std::optional<long long> seed;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void prepare_out_dir(const std::string& dir, bool force) {
  if (dir.empty()) throw ConfigError("--out is required", "--out");
  const fs::path p(dir);
  if (fs::exists(p)) {
    if (!fs::is_directory(p)) throw RefusedError("'" + dir + "' exists and is not a directory");
    if (!fs::is_empty(p) && !force) {
      throw RefusedError("output directory '" + dir + "' is not empty (use --force to overwrite)");
    }
  }
  fs::create_directories(p);
}

ExperimentSpec load_spec(const Options& o) {
  if (o.spec_file.empty()) throw ConfigError("--spec is required", "--spec");
  if (!fs::exists(o.spec_file)) throw ConfigError("spec file '" + o.spec_file + "' not found", "--spec");
  auto kv = KvFile::load(o.spec_file);
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("seed must be >= 0", "--seed");
    kv.set("seed", std::to_string(*o.seed));
  }
  return load_experiment_spec(kv);
}

std::string seed_summary(const ExperimentSpec& spec, const std::string& command) {
  std::ostringstream os;
  os << "# seeds: real stream block " << spec.seed << " indices [0, " << spec.n_real << ")";
  if (command == "grid") {
    os << "; grid stream blocks from " << (spec.seed << 20);
  } else if (command == "calibrate" || command == "compare") {
    const auto seeds = spec.run_seeds();
    os << "; evaluation stream run seeds [" << seeds.front() << ", " << seeds.back()
       << "], block = run_seed*2^20 + eval_idx, " << spec.n_sim << " replications each";
  }
  os << '\n';
  return os.str();
}

void write_manifest(const fs::path& dir, const std::string& command, const Options& o,
                    const ExperimentSpec& spec) {
  std::ofstream f(dir / "manifest");
  if (!f) throw std::runtime_error("cannot write manifest in '" + dir.string() + "'");
  f << "# command: " << command << '\n'
    << "# spec_file: " << o.spec_file << '\n'
    << "# version: " << kToolVersion << '\n'
    << "# timestamp: " << utc_timestamp() << '\n';
  if (!o.real_file.empty()) f << "# real_file: " << o.real_file << '\n';
  if (!o.grid_file.empty()) f << "# grid_file: " << o.grid_file << '\n';
  if (!o.strategy.empty()) f << "# strategy: " << o.strategy << '\n';
  f << seed_summary(spec, command) << format_experiment_spec(spec);
}

SampleSet obtain_real(const Options& o, const ExperimentSpec& spec, std::size_t jobs,
                      std::ostream& err) {
  if (!o.real_file.empty()) {
    auto real = read_samples_csv(o.real_file);
    if (real.empty()) throw ConfigError("real data file has no rows", "--real");
    return real;
  }
  err << "generating " << spec.n_real << " real samples\n";
  return generate_real_data(spec, jobs);
}

std::size_t resolve_jobs(const Options& o) { return o.jobs ? o.jobs : default_jobs(); }

int cmd_gen_real(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = load_spec(o);
  prepare_out_dir(o.out_dir, o.force);
  const auto real = generate_real_data(spec, resolve_jobs(o));
  write_samples_csv(fs::path(o.out_dir) / "real.csv", real);
  write_manifest(o.out_dir, "gen-real", o, spec);
  (void)err;
  out << "wrote " << real.size() << " samples of length "
      << (real.empty() ? 0 : real.front().values.size()) << " to "
      << (fs::path(o.out_dir) / "real.csv").string() << '\n';
  return kExitOk;
}

int cmd_grid(const Options& o, std::ostream& out, std::ostream& err) {
  const auto spec = load_spec(o);
  if (o.grid_file.empty()) throw ConfigError("--grid is required", "--grid");
  const auto names = spec.space.names();
  const auto grid = read_theta_csv(o.grid_file, names);
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t d = 0; d < names.size(); ++d) {
      const auto& p = spec.space[d];
      if (!(grid[r][d] >= p.lower && grid[r][d] <= p.upper)) {
        std::ostringstream msg;
        msg << "grid row " << (r + 1) << ": " << names[d] << " = " << grid[r][d] << " outside ["
            << p.lower << ", " << p.upper << "]";
        throw ConfigError(msg.str(), names[d]);
      }
    }
  }
  prepare_out_dir(o.out_dir, o.force);
  const auto jobs = resolve_jobs(o);
  const auto real = obtain_real(o, spec, jobs, err);
  const PreparedReference ref(real, FeatureExtractor::from_name(spec.extractor));
  GridOptions go;
  go.first_block = spec.seed << 20;
  go.jobs = jobs;
  const auto result = grid_scan(market_generator(spec.truth, spec.space), grid, ref, spec.n_sim,
                                spec.alpha, names, go);
  const fs::path dir(o.out_dir);
  {
    std::ofstream f(dir / "heatmap.csv");
    write_heatmap_csv(f, names, result.table);
  }
  {
    std::ofstream f(dir / "eligible.csv");
    write_heatmap_csv(f, names, result.eligible.records);
  }
  write_manifest(dir, "grid", o, spec);
  out << "grid points " << grid.size() << ", eligible " << result.eligible.records.size() << '\n';
  return kExitOk;
}

void print_run_line(std::ostream& out, const ExperimentSpec& spec, const Trace& t) {
  const auto best = t.best_index();
  const auto& e = t.evals.at(best);
  const auto theta = e.outcome.theta.empty() ? spec.space.from_unit(e.unit) : e.outcome.theta;
  out << std::setprecision(6) << t.strategy << " seed=" << t.seed << " best: "
      << describe_theta(spec.space.names(), theta) << " ks_stat=" << e.outcome.value
      << " q=" << e.outcome.threshold << " verdict=" << (e.outcome.eligible ? "ELIGIBLE" : "REJECTED")
      << '\n';
}

int run_and_report(const std::string& command, const Options& o, ExperimentSpec spec,
                   std::ostream& out, std::ostream& err) {
  prepare_out_dir(o.out_dir, o.force);
  const auto jobs = resolve_jobs(o);
  const auto real = obtain_real(o, spec, jobs, err);
  const auto report = run_comparison(spec, real, jobs);
  write_report(o.out_dir, spec, report);
  write_manifest(o.out_dir, command, o, spec);
  for (const auto& t : report.traces) print_run_line(out, spec, t);
  for (const auto& s : report.summaries) {
    out << std::setprecision(6) << "strategy=" << s.strategy << " success_rate=" << s.success_rate()
        << " (" << s.successes << "/" << s.completed << ", failed " << s.failed << ")"
        << " mean_final_best=" << s.mean_final_best() << '\n';
  }
  if (report.nonident) {
    const auto& n = *report.nonident;
    out << "nonident " << n.param_a << " x " << n.param_b << ": points=" << n.points;
    out << " log_corr=" << (n.log_correlation ? std::to_string(*n.log_correlation) : "undefined");
    out << " product_cv=" << (n.product_cv ? std::to_string(*n.product_cv) : "undefined") << '\n';
  }
  return report.traces.empty() ? kExitRuntime : kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  auto spec = load_spec(o);
  if (o.strategy.empty()) throw ConfigError("--strategy is required", "--strategy");
  if (std::find(kStrategyNames.begin(), kStrategyNames.end(), o.strategy) == kStrategyNames.end()) {
    throw ConfigError("unknown strategy '" + o.strategy + "' (valid: random, bo, turbo)", "--strategy");
  }
  spec.strategies = {o.strategy};
  return run_and_report("calibrate", o, std::move(spec), out, err);
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  return run_and_report("compare", o, load_spec(o), out, err);
}

void print_file(std::ostream& out, const fs::path& p, bool as_table) {
  std::ifstream in(p);
  if (!in) return;
  out << "== " << p.filename().string() << '\n';
  std::string line;
  while (std::getline(in, line)) {
    if (as_table) {
      for (const auto& cell : split_list(line)) out << std::setw(18) << cell;
      out << '\n';
    } else {
      out << line << '\n';
    }
  }
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.out_dir.empty()) throw ConfigError("--out is required", "--out");
  const fs::path dir(o.out_dir);
  if (!fs::exists(dir / "manifest")) {
    throw ConfigError("'" + o.out_dir + "' has no manifest", "--out");
  }
  {
    std::ifstream in(dir / "manifest");
    std::string line;
    while (std::getline(in, line) && line.starts_with("#")) out << line << '\n';
  }
  print_file(out, dir / "success_rate.csv", true);
  print_file(out, dir / "final_best.csv", true);
  for (const char* name : {"eligible.csv", "heatmap.csv"}) {
    std::ifstream in(dir / name);
    if (!in) continue;
    std::size_t rows = 0;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) rows += !trim(line).empty();
    out << name << ": " << rows << " rows\n";
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().starts_with("nonident_")) {
      std::ifstream in(entry.path());
      std::size_t rows = 0;
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) ++rows;
      out << entry.path().filename().string() << ": " << rows << " points\n";
    }
  }
  if (fs::exists(dir / "real.csv")) {
    const auto real = read_samples_csv(dir / "real.csv");
    out << "real.csv: " << real.size() << " samples\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator calibration by eligibility-set search"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;
  long long seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_spec) {
    if (needs_spec) sub->add_option("--spec", o.spec_file, "experiment spec file");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--jobs", o.jobs, "parallel workers (default: all cores)");
    sub->add_flag("--force", o.force, "write into a non-empty output directory");
    if (needs_spec) sub->add_option("--seed", seed, "override the spec seed");
  };
  auto* gen = app.add_subcommand("gen-real", "generate the real sample set at the true configuration");
  add_common(gen, true);
  auto* grid = app.add_subcommand("grid", "score every theta in a grid file");
  add_common(grid, true);
  grid->add_option("--grid", o.grid_file, "CSV with one column per free parameter");
  grid->add_option("--real", o.real_file, "real sample CSV (default: generate)");
  auto* cal = app.add_subcommand("calibrate", "run one search strategy");
  add_common(cal, true);
  cal->add_option("--strategy", o.strategy, "random, bo or turbo");
  cal->add_option("--real", o.real_file, "real sample CSV (default: generate)");
  auto* cmp = app.add_subcommand("compare", "run every strategy in the spec");
  add_common(cmp, true);
  cmp->add_option("--real", o.real_file, "real sample CSV (default: generate)");
  auto* rep = app.add_subcommand("report", "summarize an output directory");
  rep->add_option("--out", o.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  for (auto* sub : {gen, grid, cal, cmp}) {
    if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed;
  }

  try {
    if (gen->parsed()) return cmd_gen_real(o, out, err);
    if (grid->parsed()) return cmd_grid(o, out, err);
    if (cal->parsed()) return cmd_calibrate(o, out, err);
    if (cmp->parsed()) return cmd_compare(o, out, err);
    return cmd_report(o, out);
  } catch (const RefusedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRefused;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace calib
