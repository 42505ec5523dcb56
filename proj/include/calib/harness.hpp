#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calib/eligibility.hpp"
#include "calib/kv_file.hpp"
#include "calib/optimize.hpp"

namespace calib {

inline const std::vector<std::string> kStrategyNames = {"random", "bo", "turbo"};

struct ExperimentSpec {
  SimConfig truth;
  ThetaSpace space;
  std::size_t n_real = 1000;
  std::size_t n_sim = 50;
  double alpha = 0.05;
  std::string extractor = "identity";
  std::vector<std::string> strategies = kStrategyNames;
  std::size_t n_total = 100;
  std::uint64_t seed = 0;  // real block; run r uses seed + r
  std::size_t runs = 1;
  BoOptions bo;        // bo.n_init == 0 selects 2 * dim
  TurboOptions turbo;  // turbo.n_init == 0 selects 2 * dim
  std::optional<std::pair<std::string, std::string>> nonident_pair;

  std::vector<std::uint64_t> run_seeds() const;
  std::vector<double> truth_theta() const { return space.extract(truth); }
  std::size_t bo_init() const { return bo.n_init ? bo.n_init : 2 * space.dim(); }
};

// Simulator keys set the true configuration; the remaining keys describe the
// experiment (free_params, range.<p>, scale.<p>, N_real, n_sim, alpha,
// strategies, n_init, n_total, seed, runs, extractor, bo_*, turbo_*, ...).
ExperimentSpec load_experiment_spec(const KvFile& kv);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
std::string format_experiment_spec(const ExperimentSpec& spec);

// N_real replications at the truth from real-stream block `spec.seed`.
SampleSet generate_real_data(const ExperimentSpec& spec, std::size_t jobs = 1);

Trace run_strategy(const std::string& strategy, const ObjectiveFn& objective, std::size_t dim,
                   const ExperimentSpec& spec, std::uint64_t run_seed);

struct StrategySummary {
  std::string strategy;
  std::vector<double> mean_curve;  // mean best-so-far per evaluation index
  std::vector<double> final_best;  // one per completed run
  std::size_t successes = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;

  double success_rate() const { return completed ? double(successes) / double(completed) : 0.0; }
  double mean_final_best() const;
};

struct NonidentSummary {
  std::string param_a;
  std::string param_b;
  std::size_t points = 0;      // eligible points
  std::size_t used = 0;        // points with both coordinates > 0
  std::optional<double> log_correlation;
  std::optional<double> product_cv;
  std::vector<std::pair<double, double>> scatter;
};

NonidentSummary nonidentifiability_report(const EligibilitySet& es, const std::string& param_a,
                                          const std::string& param_b);
void write_nonident_csv(std::ostream& os, const NonidentSummary& s);

struct Report {
  std::vector<Trace> traces;
  std::vector<std::string> failures;  // "strategy seed: message"
  std::vector<StrategySummary> summaries;
  EligibilitySet eligible;
  std::optional<NonidentSummary> nonident;
};

// Runs every (strategy, seed) cell against a shared reference. Failed cells
// are recorded and left out of the aggregates.
Report run_comparison(const ExperimentSpec& spec, const SampleSet& real, std::size_t jobs = 1);

void write_report(const std::filesystem::path& dir, const ExperimentSpec& spec,
                  const Report& report);

std::vector<EligibilityRecord> trace_records(const Trace& trace);

}  // namespace calib
