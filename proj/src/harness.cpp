#include "calib/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "calib/parallel.hpp"

namespace calib {

namespace {

const std::set<std::string, std::less<>> kExperimentKeys = {
    "free_params", "N_real",         "n_sim",         "alpha",          "extractor",
    "strategies",  "n_init",         "n_total",       "seed",           "runs",
    "bo_kernel",   "bo_acquisition", "bo_candidates", "bo_kappa_lcb",   "turbo_kernel",
    "turbo_candidates", "turbo_length_init", "turbo_length_min", "turbo_length_max",
    "turbo_tau_succ",   "turbo_tau_fail",    "gp_restarts",      "nonident_pair",
};

std::size_t positive_count(const KvFile& kv, std::string_view key, std::size_t fallback) {
  if (!kv.has(key)) return fallback;
  const long long v = kv.get_int(key);
  if (v < 1) throw ConfigError("must be >= 1", std::string(key), kv.find(key)->line);
  return static_cast<std::size_t>(v);
}

template <class Fn>
auto with_line(const KvFile& kv, std::string_view key, Fn&& fn) {
  try {
    return fn(kv.get_string(key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), std::string(key), kv.find(key)->line);
  }
}

void check_strategy(const std::string& s) {
  if (std::find(kStrategyNames.begin(), kStrategyNames.end(), s) == kStrategyNames.end()) {
    throw std::invalid_argument("unknown strategy '" + s + "' (valid: random, bo, turbo)");
  }
}

}  // namespace

std::vector<std::uint64_t> ExperimentSpec::run_seeds() const {
  std::vector<std::uint64_t> out(runs);
  for (std::size_t r = 0; r < runs; ++r) out[r] = seed + r;
  return out;
}

ExperimentSpec load_experiment_spec(const KvFile& kv) {
  for (const auto& [key, entry] : kv.entries()) {
    if (kExperimentKeys.count(key) || key.starts_with("range.") || key.starts_with("scale.")) continue;
    if (key == "seed" || find_param(key) != nullptr) continue;
    throw ConfigError("unknown key", key, entry.line);
  }

  ExperimentSpec spec;
  spec.truth = load_sim_config(kv, SimConfig{}, true);

  if (!kv.has("free_params")) throw ConfigError("missing required key", "free_params");
  std::vector<ParamSpec> params;
  for (const auto& name : kv.get_list("free_params")) {
    const auto* info = find_param(name);
    if (info == nullptr || !info->calibratable) {
      throw ConfigError("'" + name + "' is not a calibratable parameter", "free_params",
                        kv.find("free_params")->line);
    }
    ParamSpec p = default_param_spec(name);
    if (const auto* e = kv.find("range." + name)) {
      const auto parts = split_list(e->value);
      if (parts.size() != 2) throw ConfigError("expected 'lo, hi'", "range." + name, e->line);
      p.lower = parse_double(parts[0], "range." + name, e->line);
      p.upper = parse_double(parts[1], "range." + name, e->line);
    }
    if (const auto* e = kv.find("scale." + name)) {
      try {
        p.scale = parse_scale(e->value);
      } catch (const ConfigError& err) {
        throw ConfigError(err.message(), "scale." + name, e->line);
      }
    }
    params.push_back(std::move(p));
  }
  for (const auto& [key, entry] : kv.entries()) {
    if (!key.starts_with("range.") && !key.starts_with("scale.")) continue;
    const std::string name = key.substr(6);
    if (std::none_of(params.begin(), params.end(), [&](const ParamSpec& p) { return p.name == name; })) {
      throw ConfigError("range/scale given for a parameter not in free_params", key, entry.line);
    }
  }
  try {
    spec.space = ThetaSpace(std::move(params));
  } catch (const ConfigError& e) {
    const std::string k = "range." + e.key();
    const auto* entry = kv.find(k);
    throw ConfigError(e.message(), entry ? k : e.key(), entry ? entry->line : 0);
  }
  const auto truth = spec.truth_theta();
  if (!spec.space.contains(truth)) {
    throw ConfigError("true configuration lies outside the search ranges", "free_params",
                      kv.find("free_params")->line);
  }

  spec.n_real = positive_count(kv, "N_real", spec.n_real);
  spec.n_sim = positive_count(kv, "n_sim", spec.n_sim);
  if (spec.n_real > kMaxSeedIndex + 1 || spec.n_sim > kMaxSeedIndex + 1) {
    throw ConfigError("sample counts are limited to 65536", "N_real");
  }
  if (kv.has("alpha")) {
    spec.alpha = kv.get_double("alpha");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
      throw ConfigError("alpha must lie in (0,1)", "alpha", kv.find("alpha")->line);
    }
  }
  if (kv.has("extractor")) {
    spec.extractor = with_line(kv, "extractor", [](const std::string& v) {
      FeatureExtractor::from_name(v);
      return v;
    });
  }
  if (kv.has("strategies")) {
    spec.strategies = kv.get_list("strategies");
    for (const auto& s : spec.strategies) {
      try {
        check_strategy(s);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), "strategies", kv.find("strategies")->line);
      }
    }
  }
  spec.n_total = positive_count(kv, "n_total", spec.n_total);
  if (kv.has("seed")) {
    const long long s = kv.get_int("seed");
    if (s < 0 || s >= (1LL << 19)) throw ConfigError("seed out of range", "seed", kv.find("seed")->line);
    spec.seed = static_cast<std::uint64_t>(s);
  }
  spec.runs = positive_count(kv, "runs", spec.runs);

  spec.bo.n_init = kv.has("n_init") ? positive_count(kv, "n_init", 0) : 0;
  spec.bo.n_total = spec.n_total;
  spec.bo.family = KernelFamily::matern52;
  spec.bo.acquisition = BoAcquisition::thompson;
  if (kv.has("bo_kernel")) spec.bo.family = with_line(kv, "bo_kernel", parse_kernel_family);
  if (kv.has("bo_acquisition")) {
    spec.bo.acquisition = with_line(kv, "bo_acquisition", parse_bo_acquisition);
  }
  spec.bo.candidates = positive_count(kv, "bo_candidates", spec.bo.candidates);
  if (kv.has("bo_kappa_lcb")) spec.bo.kappa_lcb = kv.get_double("bo_kappa_lcb");

  spec.turbo.n_init = 0;
  spec.turbo.n_total = spec.n_total;
  if (kv.has("turbo_kernel")) spec.turbo.family = with_line(kv, "turbo_kernel", parse_kernel_family);
  spec.turbo.candidates = positive_count(kv, "turbo_candidates", spec.turbo.candidates);
  if (kv.has("turbo_length_init")) spec.turbo.length_init = kv.get_double("turbo_length_init");
  if (kv.has("turbo_length_min")) spec.turbo.length_min = kv.get_double("turbo_length_min");
  if (kv.has("turbo_length_max")) spec.turbo.length_max = kv.get_double("turbo_length_max");
  spec.turbo.tau_succ = positive_count(kv, "turbo_tau_succ", spec.turbo.tau_succ);
  spec.turbo.tau_fail = kv.has("turbo_tau_fail") ? positive_count(kv, "turbo_tau_fail", 0) : 0;
  if (!(spec.turbo.length_min > 0 && spec.turbo.length_min <= spec.turbo.length_init &&
        spec.turbo.length_init <= spec.turbo.length_max)) {
    throw ConfigError("trust-region lengths need 0 < min <= init <= max", "turbo_length_init");
  }
  const std::size_t restarts = positive_count(kv, "gp_restarts", 5);
  spec.bo.gp_restarts = restarts;
  spec.turbo.gp_restarts = restarts;

  const std::size_t init = std::max(spec.bo_init(), 2 * spec.space.dim());
  if (init > spec.n_total) {
    throw ConfigError("initial budget exceeds n_total", "n_total", kv.find("n_total") ? kv.find("n_total")->line : 0);
  }
  if (kv.has("nonident_pair")) {
    const auto pair = kv.get_list("nonident_pair");
    const auto line = kv.find("nonident_pair")->line;
    if (pair.size() != 2) throw ConfigError("expected two parameter names", "nonident_pair", line);
    for (const auto& p : pair) {
      try {
        spec.space.index_of(p);
      } catch (const ConfigError&) {
        throw ConfigError("'" + p + "' is not a free parameter", "nonident_pair", line);
      }
    }
    spec.nonident_pair = std::make_pair(pair[0], pair[1]);
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return load_experiment_spec(KvFile::load(path));
}

std::string format_experiment_spec(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# true configuration\n" << format_sim_config(spec.truth);
  os << "# experiment\nfree_params = ";
  const auto names = spec.space.names();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  os << '\n';
  for (const auto& p : spec.space.params()) {
    os << "range." << p.name << " = " << format_number(p.lower) << ", " << format_number(p.upper) << '\n';
    os << "scale." << p.name << " = " << to_string(p.scale) << '\n';
  }
  os << "N_real = " << spec.n_real << "\nn_sim = " << spec.n_sim << "\nalpha = " << format_number(spec.alpha)
     << "\nextractor = " << spec.extractor << "\nstrategies = ";
  for (std::size_t i = 0; i < spec.strategies.size(); ++i) os << (i ? ", " : "") << spec.strategies[i];
  os << "\nn_init = " << spec.bo_init() << "\nn_total = " << spec.n_total
     << "\nruns = " << spec.runs << "\nbo_kernel = " << to_string(spec.bo.family)
     << "\nbo_acquisition = " << to_string(spec.bo.acquisition)
     << "\nbo_candidates = " << spec.bo.candidates << "\nbo_kappa_lcb = " << format_number(spec.bo.kappa_lcb)
     << "\nturbo_kernel = " << to_string(spec.turbo.family)
     << "\nturbo_candidates = " << spec.turbo.candidates
     << "\nturbo_length_init = " << format_number(spec.turbo.length_init)
     << "\nturbo_length_min = " << format_number(spec.turbo.length_min)
     << "\nturbo_length_max = " << format_number(spec.turbo.length_max)
     << "\nturbo_tau_succ = " << spec.turbo.tau_succ
     << "\nturbo_tau_fail = " << (spec.turbo.tau_fail ? spec.turbo.tau_fail : spec.space.dim())
     << "\ngp_restarts = " << spec.bo.gp_restarts << '\n';
  if (spec.nonident_pair) {
    os << "nonident_pair = " << spec.nonident_pair->first << ", " << spec.nonident_pair->second << '\n';
  }
  return os.str();
}

SampleSet generate_real_data(const ExperimentSpec& spec, std::size_t jobs) {
  SampleSet out(spec.n_real);
  parallel_for(spec.n_real, jobs, [&](std::size_t i) {
    SimConfig cfg = spec.truth;
    cfg.seed = replication_seed(SeedStream::real, spec.seed, i);
    try {
      out[i] = run_simulation(cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("real-data replication " + std::to_string(i) + " failed: " + e.what());
    }
  });
  return out;
}

Trace run_strategy(const std::string& strategy, const ObjectiveFn& objective, std::size_t dim,
                   const ExperimentSpec& spec, std::uint64_t run_seed) {
  check_strategy(strategy);
  if (strategy == "random") return random_search(objective, dim, spec.n_total, run_seed);
  if (strategy == "bo") {
    BoOptions o = spec.bo;
    o.n_init = spec.bo_init();
    o.n_total = spec.n_total;
    return bo_loop(objective, dim, o, run_seed);
  }
  TurboOptions o = spec.turbo;
  o.n_total = spec.n_total;
  return turbo_loop(objective, dim, o, run_seed);
}

double StrategySummary::mean_final_best() const {
  if (final_best.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : final_best) s += v;
  return s / double(final_best.size());
}

std::vector<EligibilityRecord> trace_records(const Trace& trace) {
  std::vector<EligibilityRecord> out;
  out.reserve(trace.evals.size());
  for (const auto& e : trace.evals) {
    EligibilityRecord r;
    r.theta = e.outcome.theta.empty() ? e.unit : e.outcome.theta;
    r.ks.statistic = e.outcome.value;
    r.ks.critical_value = e.outcome.threshold;
    r.ks.eligible = e.outcome.eligible;
    r.seed_block = e.index;
    out.push_back(std::move(r));
  }
  return out;
}

NonidentSummary nonidentifiability_report(const EligibilitySet& es, const std::string& param_a,
                                          const std::string& param_b) {
  const auto& names = es.meta.param_names;
  auto col = [&](const std::string& p) {
    auto it = std::find(names.begin(), names.end(), p);
    if (it == names.end()) throw std::invalid_argument("parameter '" + p + "' not in eligibility set");
    return static_cast<std::size_t>(it - names.begin());
  };
  const std::size_t ia = col(param_a);
  const std::size_t ib = col(param_b);
  NonidentSummary s;
  s.param_a = param_a;
  s.param_b = param_b;
  s.points = es.records.size();
  std::vector<double> la;
  std::vector<double> lb;
  std::vector<double> prod;
  for (const auto& r : es.records) {
    const double a = r.theta[ia];
    const double b = r.theta[ib];
    s.scatter.emplace_back(a, b);
    if (a > 0.0 && b > 0.0) {
      la.push_back(std::log(a));
      lb.push_back(std::log(b));
      prod.push_back(a * b);
    }
  }
  s.used = la.size();
  if (s.used >= 2) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < s.used; ++i) {
      ma += la[i];
      mb += lb[i];
    }
    ma /= double(s.used);
    mb /= double(s.used);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < s.used; ++i) {
      sab += (la[i] - ma) * (lb[i] - mb);
      saa += (la[i] - ma) * (la[i] - ma);
      sbb += (lb[i] - mb) * (lb[i] - mb);
    }
    if (saa > 0 && sbb > 0) s.log_correlation = sab / std::sqrt(saa * sbb);
    double mp = 0;
    for (double p : prod) mp += p;
    mp /= double(s.used);
    double vp = 0;
    for (double p : prod) vp += (p - mp) * (p - mp);
    vp /= double(s.used);
    if (mp > 0) s.product_cv = std::sqrt(vp) / mp;
  }
  return s;
}

void write_nonident_csv(std::ostream& os, const NonidentSummary& s) {
  os << s.param_a << ',' << s.param_b << ",product\n" << std::setprecision(17);
  for (const auto& [a, b] : s.scatter) os << a << ',' << b << ',' << a * b << '\n';
}

Report run_comparison(const ExperimentSpec& spec, const SampleSet& real, std::size_t jobs) {
  if (spec.strategies.empty()) throw std::invalid_argument("no strategies selected");
  if (spec.runs == 0) throw std::invalid_argument("no seeds selected");
  auto reference = std::make_shared<const PreparedReference>(
      real, FeatureExtractor::from_name(spec.extractor));
  const auto generator = market_generator(spec.truth, spec.space);
  const auto seeds = spec.run_seeds();

  struct Cell {
    std::size_t slot;
    std::string strategy;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < spec.strategies.size(); ++k) {
    for (auto seed : seeds) cells.push_back({k, spec.strategies[k], seed});
  }
  std::vector<std::optional<Trace>> traces(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    try {
      KsObjective objective(generator, reference, spec.space, spec.n_sim, spec.alpha, cells[i].seed);
      traces[i] = run_strategy(cells[i].strategy, std::cref(objective), spec.space.dim(), spec,
                               cells[i].seed);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  Report report;
  std::vector<EligibilityRecord> all_records;
  for (std::size_t k = 0; k < spec.strategies.size(); ++k) {
    StrategySummary sum;
    sum.strategy = spec.strategies[k];
    sum.mean_curve.assign(spec.n_total, 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].slot != k) continue;
      if (!traces[i]) {
        ++sum.failed;
        continue;
      }
      const Trace& t = *traces[i];
      ++sum.completed;
      sum.final_best.push_back(t.best_value());
      if (t.found_eligible()) ++sum.successes;
      for (std::size_t k = 0; k < spec.n_total; ++k) {
        sum.mean_curve[k] += t.best_so_far[std::min(k, t.best_so_far.size() - 1)];
      }
    }
    if (sum.completed > 0) {
      for (auto& v : sum.mean_curve) v /= double(sum.completed);
    }
    report.summaries.push_back(std::move(sum));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (traces[i]) {
      auto recs = trace_records(*traces[i]);
      all_records.insert(all_records.end(), recs.begin(), recs.end());
      report.traces.push_back(std::move(*traces[i]));
    } else {
      const std::string msg = cells[i].strategy + " seed " + std::to_string(cells[i].seed) + ": " + errors[i];
      std::cerr << "warning: cell failed, excluded from aggregates: " << msg << '\n';
      report.failures.push_back(msg);
    }
  }
  report.eligible = collect_from_trace(all_records,
                                       make_meta(*reference, spec.n_sim, spec.alpha, spec.space.names()));
  if (spec.nonident_pair && !report.eligible.records.empty()) {
    report.nonident = nonidentifiability_report(report.eligible, spec.nonident_pair->first,
                                                spec.nonident_pair->second);
  }
  return report;
}

void write_report(const std::filesystem::path& dir, const ExperimentSpec& spec,
                  const Report& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "traces");
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << std::setprecision(17);
    return f;
  };
  const auto names = spec.space.names();
  for (const auto& t : report.traces) {
    auto f = open(dir / "traces" / (t.strategy + "_" + std::to_string(t.seed) + ".csv"));
    write_trace_csv(f, names, t);
  }
  {
    auto f = open(dir / "curve_mean.csv");
    f << "eval_idx";
    for (const auto& s : report.summaries) f << ',' << s.strategy;
    f << '\n';
    for (std::size_t k = 0; k < spec.n_total; ++k) {
      f << k;
      for (const auto& s : report.summaries) f << ',' << s.mean_curve[k];
      f << '\n';
    }
  }
  {
    auto f = open(dir / "final_best.csv");
    f << "strategy,seed,final_best,eligible_found\n";
    for (const auto& t : report.traces) {
      f << t.strategy << ',' << t.seed << ',' << t.best_value() << ',' << (t.found_eligible() ? 1 : 0)
        << '\n';
    }
  }
  {
    auto f = open(dir / "success_rate.csv");
    f << "strategy,successes,completed,failed,success_rate,mean_final_best\n";
    for (const auto& s : report.summaries) {
      f << s.strategy << ',' << s.successes << ',' << s.completed << ',' << s.failed << ','
        << s.success_rate() << ',' << s.mean_final_best() << '\n';
    }
  }
  {
    auto f = open(dir / "eligible.csv");
    write_heatmap_csv(f, names, report.eligible.records);
  }
  if (report.nonident) {
    auto f = open(dir / ("nonident_" + report.nonident->param_a + "_" + report.nonident->param_b + ".csv"));
    write_nonident_csv(f, *report.nonident);
  }
}

}  // namespace calib
