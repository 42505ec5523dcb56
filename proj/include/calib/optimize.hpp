#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "calib/eligibility.hpp"
#include "calib/gp.hpp"
#include "calib/trust_region.hpp"

namespace calib {

struct Outcome {
  double value = 0.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool eligible = false;
  std::vector<double> theta;  // natural units; empty for plain unit-cube objectives
};

// Objective over the unit cube. `eval_index` is the 0-based position of the
// call within the current run and selects the simulation seed block.
using ObjectiveFn = std::function<Outcome(std::span<const double> unit, std::size_t eval_index)>;

struct Evaluation {
  std::size_t index = 0;
  std::vector<double> unit;
  Outcome outcome;
  double wall_seconds = 0.0;
};

struct Trace {
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t n_init = 0;
  std::size_t n_total = 0;
  std::vector<Evaluation> evals;
  std::vector<double> best_so_far;
  std::vector<double> region_lengths;  // trust-region side after each update
  std::vector<std::string> notes;      // fallbacks and restarts

  void append(Evaluation e);
  double best_value() const;
  std::size_t best_index() const;
  bool found_eligible() const;
};

// K-S distance objective: maps unit points through the space, simulates n_sim
// replications from block evaluation_block(run_seed, eval_index) and scores
// them against the prepared reference.
class KsObjective {
 public:
  KsObjective(SeriesGenerator generator, std::shared_ptr<const PreparedReference> real,
              ThetaSpace space, std::size_t n_sim, double alpha, std::uint64_t run_seed);

  Outcome operator()(std::span<const double> unit, std::size_t eval_index) const;
  EligibilityRecord evaluate(std::span<const double> theta, std::size_t eval_index) const;

  const ThetaSpace& space() const noexcept { return space_; }
  const PreparedReference& reference() const noexcept { return *real_; }
  std::size_t n_sim() const noexcept { return n_sim_; }
  double alpha() const noexcept { return alpha_; }

 private:
  SeriesGenerator generator_;
  std::shared_ptr<const PreparedReference> real_;
  ThetaSpace space_;
  std::size_t n_sim_;
  double alpha_;
  std::uint64_t run_seed_;
};

enum class AcquisitionKind { ei, pi, lcb };

std::string to_string(AcquisitionKind k);

// EI = E[max(best - g, 0)], PI = P(g < best), LCB = mean - kappa * sd.
// EI and PI are larger-is-better; LCB is smaller-is-better.
double acquisition_value(double mean, double sd, double best_y, AcquisitionKind kind,
                         double kappa_lcb = 1.96);
double acquisition(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, double best_y,
                   AcquisitionKind kind, double kappa_lcb = 1.96);

// Initial design shared by every strategy for a given seed.
std::vector<std::vector<double>> initial_design(std::size_t dim, std::size_t count,
                                                std::uint64_t seed);

Trace random_search(const ObjectiveFn& objective, std::size_t dim, std::size_t n_total,
                    std::uint64_t seed);

enum class BoAcquisition { mixed, ei, pi, lcb, thompson };

std::string to_string(BoAcquisition a);
BoAcquisition parse_bo_acquisition(const std::string& name);

struct BoOptions {
  std::size_t n_init = 10;
  std::size_t n_total = 100;
  KernelFamily family = KernelFamily::rbf;
  BoAcquisition acquisition = BoAcquisition::mixed;
  std::size_t candidates = 500;
  double kappa_lcb = 1.96;
  std::size_t gp_restarts = 5;
};

Trace bo_loop(const ObjectiveFn& objective, std::size_t dim, const BoOptions& options,
              std::uint64_t seed);

struct TurboOptions {
  std::size_t n_init = 0;  // 0 selects 2 * dim
  std::size_t n_total = 100;
  KernelFamily family = KernelFamily::matern52;
  std::size_t candidates = 500;
  double length_init = 0.8;
  double length_min = 1.0 / 128.0;
  double length_max = 1.6;
  std::size_t tau_succ = 1;
  std::size_t tau_fail = 0;  // 0 selects dim
  std::size_t gp_restarts = 5;
};

Trace turbo_loop(const ObjectiveFn& objective, std::size_t dim, const TurboOptions& options,
                 std::uint64_t seed);

// `eval_idx,<params>,ks_stat,eligible,best_so_far`. Uses outcome.theta when
// present, otherwise the unit point.
void write_trace_csv(std::ostream& os, const std::vector<std::string>& param_names,
                     const Trace& trace);

}  // namespace calib
