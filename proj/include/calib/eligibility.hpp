#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calib/ksdist.hpp"
#include "calib/params.hpp"
#include "calib/seeds.hpp"

namespace calib {

// Draws one output series at `theta` (natural units) using replication `seed`.
using SeriesGenerator =
    std::function<SeriesSample(std::span<const double> theta, std::uint64_t seed)>;

// Runs the market simulator with `space` applied on top of `base`.
SeriesGenerator market_generator(SimConfig base, ThetaSpace space);

SampleSet simulate_block(const SeriesGenerator& generator, std::span<const double> theta,
                         SeedStream stream, std::uint64_t block, std::size_t count);

struct EligibilityRecord {
  std::vector<double> theta;
  KsResult ks;
  std::size_t n_sim = 0;
  std::uint64_t seed_block = 0;
};

struct EligibilityMeta {
  double alpha = 0.05;
  std::size_t n_real = 0;
  std::size_t n_sim = 0;
  std::size_t dims = 0;
  std::string extractor;
  std::vector<std::string> param_names;
};

struct EligibilitySet {
  EligibilityMeta meta;
  std::vector<EligibilityRecord> records;  // all satisfy statistic < critical value
};

EligibilityMeta make_meta(const PreparedReference& real, std::size_t n_sim, double alpha,
                          std::vector<std::string> param_names);

// Simulates `n_sim` replications at theta from the evaluation-stream block
// `seed_block` and scores them against the reference. Simulator failures are
// rethrown with theta in the message.
EligibilityRecord evaluate_theta(const SeriesGenerator& generator, std::span<const double> theta,
                                 const PreparedReference& real, std::size_t n_sim, double alpha,
                                 std::uint64_t seed_block,
                                 SeedStream stream = SeedStream::evaluation);

struct GridOptions {
  bool shared_seeds = false;    // every point uses first_block
  std::uint64_t first_block = 0;  // point i uses first_block + i otherwise
  std::size_t jobs = 1;
};

struct GridScanResult {
  EligibilitySet eligible;
  std::vector<EligibilityRecord> table;  // one row per grid point, input order
};

GridScanResult grid_scan(const SeriesGenerator& generator,
                         const std::vector<std::vector<double>>& grid,
                         const PreparedReference& real, std::size_t n_sim, double alpha,
                         std::vector<std::string> param_names, const GridOptions& options = {});

// Keeps strictly eligible records and collapses identical thetas to the one
// with the smallest statistic.
EligibilitySet collect_from_trace(std::span<const EligibilityRecord> trace, EligibilityMeta meta);

// Parameter columns, then `ks_stat,eligible`.
void write_heatmap_csv(std::ostream& os, const std::vector<std::string>& param_names,
                       std::span<const EligibilityRecord> records);
std::vector<std::vector<double>> read_theta_csv(const std::string& path,
                                                const std::vector<std::string>& param_names);

std::string describe_theta(const std::vector<std::string>& names, std::span<const double> theta);

}  // namespace calib
