#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calib/kv_file.hpp"
#include "calib/order_book.hpp"

namespace calib {

inline constexpr SimTime kNanosPerSecond = 1'000'000'000LL;
inline constexpr SimTime kNanosPerMinute = 60 * kNanosPerSecond;
inline constexpr SimTime kNanosPerHour = 60 * kNanosPerMinute;

struct ValueAgentGroup {
  int count = 0;
  double arrival_rate = 1e-12;  // Poisson intensity per agent, events per ns
  Qty min_size = 20;
  Qty max_size = 50;
};

struct SimConfig {
  std::array<ValueAgentGroup, 3> value_groups{{
      {100, 1e-12, 20, 50},
      {0, 1e-12, 100, 150},
      {0, 1e-12, 200, 250},
  }};

  int num_noise = 5000;
  Qty min_size_noise = 20;
  Qty max_size_noise = 50;

  int num_mm = 1;
  SimTime mm_rate = 10 * kNanosPerSecond;  // constant interval between requotes
  Qty mm_size = 100;
  Price mm_half_spread = 5;

  Price r_bar = 100'000;
  double kappa = 1.67e-12;  // per ns
  double fund_vol = 1e-4;   // per sqrt(ns)

  double value_obs_noise = 1e-3;  // observation noise sd as a fraction of r_bar
  Price value_price_improvement = 1;
  Qty seed_order_size = 100;

  SimTime session_open = 9 * kNanosPerHour + 30 * kNanosPerMinute;
  SimTime session_close = 16 * kNanosPerHour;
  SimTime series_start = 10 * kNanosPerHour;
  SimTime series_end = 16 * kNanosPerHour;
  SimTime sampling_interval = kNanosPerMinute;

  std::uint64_t seed = 0;

  std::size_t bucket_count() const noexcept;
  std::size_t sample_length() const noexcept { return 2 * bucket_count(); }
};

// Throws ConfigError naming the first violated invariant.
void validate(const SimConfig& config);

// Reads `key = value` pairs whose keys are simulator parameter names
// (num_value_1, lambda_a_1, ..., r_bar, kappa, fund_vol, session_open, ...).
// Clock keys accept integer nanoseconds or HH:MM[:SS]. Unknown keys are an
// error unless `allow_unknown` is set.
SimConfig load_sim_config(const KvFile& kv, SimConfig base = {}, bool allow_unknown = false);
SimConfig load_sim_config(const std::filesystem::path& path);
std::string format_sim_config(const SimConfig& config);

// Concatenated per-bucket mid-price log returns followed by per-bucket volume.
struct SeriesSample {
  std::vector<double> values;

  std::size_t buckets() const noexcept { return values.size() / 2; }
  std::span<const double> returns() const noexcept {
    return std::span<const double>(values).first(buckets());
  }
  std::span<const double> volumes() const noexcept {
    return std::span<const double>(values).subspan(buckets());
  }
};

using SampleSet = std::vector<SeriesSample>;

struct FundamentalState {
  double value = 0.0;
  SimTime time = 0;
};

// Euler step of the mean-reverting fundamental, floored at one cent. The
// reversion fraction kappa*dt is capped at 1 so long gaps land on r_bar
// instead of overshooting it.
FundamentalState step_fundamental(const FundamentalState& state, SimTime dt, double noise,
                                  double r_bar, double kappa, double fund_vol);

struct MidPoint {
  SimTime time = 0;
  double mid = 0.0;
};

SeriesSample extract_series(std::span<const Trade> trades, std::span<const MidPoint> mid_history,
                            const SimConfig& config);

struct SimulationResult {
  SeriesSample sample;
  std::vector<Trade> trades;
  std::vector<MidPoint> mid_history;
  std::vector<double> fundamental_path;  // value after every wake, in order
};

SimulationResult run_simulation_detailed(const SimConfig& config);
SeriesSample run_simulation(const SimConfig& config);

void write_samples_csv(std::ostream& os, const SampleSet& samples);
void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples);
SampleSet read_samples_csv(const std::filesystem::path& path);

}  // namespace calib
