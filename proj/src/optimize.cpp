#include "calib/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

#include "calib/seeds.hpp"

namespace calib {

void Trace::append(Evaluation e) {
  const double prev = best_so_far.empty() ? std::numeric_limits<double>::infinity()
                                          : best_so_far.back();
  best_so_far.push_back(std::min(prev, e.outcome.value));
  evals.push_back(std::move(e));
}

double Trace::best_value() const {
  return best_so_far.empty() ? std::numeric_limits<double>::infinity() : best_so_far.back();
}

std::size_t Trace::best_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].outcome.value < evals[best].outcome.value) best = i;
  }
  return best;
}

bool Trace::found_eligible() const {
  return std::any_of(evals.begin(), evals.end(), [](const Evaluation& e) { return e.outcome.eligible; });
}

KsObjective::KsObjective(SeriesGenerator generator, std::shared_ptr<const PreparedReference> real,
                         ThetaSpace space, std::size_t n_sim, double alpha, std::uint64_t run_seed)
    : generator_(std::move(generator)),
      real_(std::move(real)),
      space_(std::move(space)),
      n_sim_(n_sim),
      alpha_(alpha),
      run_seed_(run_seed) {
  if (!real_) throw std::invalid_argument("objective needs a reference set");
}

EligibilityRecord KsObjective::evaluate(std::span<const double> theta, std::size_t eval_index) const {
  return evaluate_theta(generator_, theta, *real_, n_sim_, alpha_,
                        evaluation_block(run_seed_, eval_index));
}

Outcome KsObjective::operator()(std::span<const double> unit, std::size_t eval_index) const {
  const auto theta = space_.from_unit(unit);
  const auto rec = evaluate(theta, eval_index);
  Outcome out;
  out.value = rec.ks.statistic;
  out.threshold = rec.ks.critical_value;
  out.eligible = rec.ks.eligible;
  out.theta = theta;
  return out;
}

std::string to_string(AcquisitionKind k) {
  switch (k) {
    case AcquisitionKind::ei: return "ei";
    case AcquisitionKind::pi: return "pi";
    case AcquisitionKind::lcb: return "lcb";
  }
  return "?";
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

double acquisition_value(double mean, double sd, double best_y, AcquisitionKind kind,
                         double kappa_lcb) {
  const double gap = best_y - mean;
  switch (kind) {
    case AcquisitionKind::ei:
      if (!(sd > 0.0)) return std::max(gap, 0.0);
      return gap * normal_cdf(gap / sd) + sd * normal_pdf(gap / sd);
    case AcquisitionKind::pi:
      if (!(sd > 0.0)) return gap > 0.0 ? 1.0 : 0.0;
      return normal_cdf(gap / sd);
    case AcquisitionKind::lcb:
      return mean - kappa_lcb * sd;
  }
  return 0.0;
}

double acquisition(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, double best_y,
                   AcquisitionKind kind, double kappa_lcb) {
  const auto p = model.posterior(x);
  return acquisition_value(p.mean, std::sqrt(p.variance), best_y, kind, kappa_lcb);
}

std::string to_string(BoAcquisition a) {
  switch (a) {
    case BoAcquisition::mixed: return "mixed";
    case BoAcquisition::ei: return "ei";
    case BoAcquisition::pi: return "pi";
    case BoAcquisition::lcb: return "lcb";
    case BoAcquisition::thompson: return "thompson";
  }
  return "?";
}

BoAcquisition parse_bo_acquisition(const std::string& name) {
  if (name == "mixed") return BoAcquisition::mixed;
  if (name == "ei") return BoAcquisition::ei;
  if (name == "pi") return BoAcquisition::pi;
  if (name == "lcb") return BoAcquisition::lcb;
  if (name == "thompson" || name == "ts") return BoAcquisition::thompson;
  throw std::invalid_argument("unknown acquisition '" + name +
                              "' (valid: mixed, ei, pi, lcb, thompson)");
}

std::vector<std::vector<double>> initial_design(std::size_t dim, std::size_t count,
                                                std::uint64_t seed) {
  auto rng = make_rng(seed, RngPurpose::initial_design);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return pts;
}

namespace {

class Runner {
 public:
  Runner(const ObjectiveFn& objective, Trace& trace) : objective_(objective), trace_(trace) {}

  const Evaluation& evaluate(std::vector<double> unit) {
    const auto start = std::chrono::steady_clock::now();
    Evaluation e;
    e.index = trace_.evals.size();
    e.outcome = objective_(unit, e.index);
    e.unit = std::move(unit);
    e.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace_.append(std::move(e));
    return trace_.evals.back();
  }

  std::size_t done() const { return trace_.evals.size(); }

 private:
  const ObjectiveFn& objective_;
  Trace& trace_;
};

Eigen::MatrixXd rows_of(const std::vector<Evaluation>& evals, std::size_t from, std::size_t dim,
                        const std::vector<std::size_t>* subset = nullptr) {
  const std::size_t n = subset ? subset->size() : evals.size() - from;
  Eigen::MatrixXd X(n, dim);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& u = evals[subset ? (*subset)[r] : from + r].unit;
    for (std::size_t c = 0; c < dim; ++c) X(r, c) = u[c];
  }
  return X;
}

Eigen::VectorXd values_of(const std::vector<Evaluation>& evals, std::size_t from,
                          const std::vector<std::size_t>* subset = nullptr) {
  const std::size_t n = subset ? subset->size() : evals.size() - from;
  Eigen::VectorXd y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = evals[subset ? (*subset)[r] : from + r].outcome.value;
  return y;
}

std::vector<double> uniform_point(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(dim);
  for (auto& v : p) v = u(rng);
  return p;
}

std::vector<double> row_vector(const Eigen::MatrixXd& M, Eigen::Index r) {
  std::vector<double> v(M.cols());
  for (Eigen::Index c = 0; c < M.cols(); ++c) v[c] = M(r, c);
  return v;
}

void check_budget(std::size_t n_init, std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("n_total must be >= 1");
  if (n_init == 0) throw std::invalid_argument("n_init must be >= 1");
  if (n_init > n_total) throw std::invalid_argument("n_init must not exceed n_total");
}

}  // namespace

Trace random_search(const ObjectiveFn& objective, std::size_t dim, std::size_t n_total,
                    std::uint64_t seed) {
  check_budget(1, n_total);
  Trace trace;
  trace.strategy = "random";
  trace.seed = seed;
  trace.n_init = n_total;
  trace.n_total = n_total;
  Runner run(objective, trace);
  for (auto& p : initial_design(dim, n_total, seed)) run.evaluate(std::move(p));
  return trace;
}

Trace bo_loop(const ObjectiveFn& objective, std::size_t dim, const BoOptions& opt,
              std::uint64_t seed) {
  check_budget(opt.n_init, opt.n_total);
  Trace trace;
  trace.strategy = "bo";
  trace.seed = seed;
  trace.n_init = opt.n_init;
  trace.n_total = opt.n_total;
  Runner run(objective, trace);
  for (auto& p : initial_design(dim, opt.n_init, seed)) run.evaluate(std::move(p));

  auto rng = make_rng(seed, RngPurpose::bo);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_kind(0, 2);
  std::optional<KernelSpec> warm;

  while (run.done() < opt.n_total) {
    AcquisitionKind kind = AcquisitionKind::ei;
    switch (opt.acquisition) {
      case BoAcquisition::mixed: kind = static_cast<AcquisitionKind>(pick_kind(rng)); break;
      case BoAcquisition::ei: kind = AcquisitionKind::ei; break;
      case BoAcquisition::pi: kind = AcquisitionKind::pi; break;
      case BoAcquisition::lcb: kind = AcquisitionKind::lcb; break;
      case BoAcquisition::thompson: break;
    }
    Eigen::MatrixXd cand(opt.candidates, dim);
    for (Eigen::Index r = 0; r < cand.rows(); ++r) {
      for (std::size_t c = 0; c < dim; ++c) cand(r, c) = u(rng);
    }

    std::optional<GpModel> model;
    try {
      GpFitOptions fo;
      fo.restarts = opt.gp_restarts;
      fo.seed = seed * 1000003u + run.done();
      if (warm) fo.warm_start = &*warm;
      model = fit_gp(rows_of(trace.evals, 0, dim), values_of(trace.evals, 0), opt.family, fo);
      warm = model->kernel();
    } catch (const std::exception& e) {
      trace.notes.push_back("eval " + std::to_string(run.done()) +
                            ": GP fit failed, random point (" + e.what() + ")");
    }
    if (!model) {
      run.evaluate(uniform_point(dim, rng));
      continue;
    }

    Eigen::Index best_row = 0;
    if (opt.acquisition == BoAcquisition::thompson) {
      const Eigen::VectorXd draw = posterior_sample(*model, cand, rng);
      draw.minCoeff(&best_row);
    } else {
      const double best_y = trace.best_value();
      double best_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < cand.rows(); ++r) {
        const double a = acquisition(*model, cand.row(r).transpose(), best_y, kind, opt.kappa_lcb);
        const double score = kind == AcquisitionKind::lcb ? -a : a;
        if (score > best_score) {
          best_score = score;
          best_row = r;
        }
      }
    }
    run.evaluate(row_vector(cand, best_row));
  }
  return trace;
}

Trace turbo_loop(const ObjectiveFn& objective, std::size_t dim, const TurboOptions& opt,
                 std::uint64_t seed) {
  const std::size_t n_init = opt.n_init ? opt.n_init : 2 * dim;
  check_budget(n_init, opt.n_total);
  TrustRegionParams tp;
  tp.length_init = opt.length_init;
  tp.length_min = opt.length_min;
  tp.length_max = opt.length_max;
  tp.tau_succ = opt.tau_succ;
  tp.tau_fail = opt.tau_fail ? opt.tau_fail : dim;
  TrustRegion region(tp);

  Trace trace;
  trace.strategy = "turbo";
  trace.seed = seed;
  trace.n_init = n_init;
  trace.n_total = opt.n_total;
  Runner run(objective, trace);
  for (auto& p : initial_design(dim, n_init, seed)) run.evaluate(std::move(p));

  auto rng = make_rng(seed, RngPurpose::turbo);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t epoch_start = 0;
  std::optional<KernelSpec> warm;

  auto epoch_best = [&] {
    std::size_t best = epoch_start;
    for (std::size_t i = epoch_start; i < trace.evals.size(); ++i) {
      if (trace.evals[i].outcome.value < trace.evals[best].outcome.value) best = i;
    }
    return best;
  };

  while (run.done() < opt.n_total) {
    if (region.needs_restart()) {
      region.restart();
      epoch_start = run.done();
      warm.reset();
      trace.notes.push_back("eval " + std::to_string(run.done()) + ": trust region restart");
      const std::size_t fresh = std::min(n_init, opt.n_total - run.done());
      for (std::size_t i = 0; i < fresh; ++i) run.evaluate(uniform_point(dim, rng));
      continue;
    }

    const std::size_t center_idx = epoch_best();
    const double incumbent = trace.evals[center_idx].outcome.value;
    const std::vector<double> center = trace.evals[center_idx].unit;
    const double L = region.length();

    // Region-local training data, falling back to the whole epoch when sparse.
    std::vector<std::size_t> local;
    for (std::size_t i = epoch_start; i < trace.evals.size(); ++i) {
      const auto& p = trace.evals[i].unit;
      bool inside = true;
      for (std::size_t c = 0; c < dim && inside; ++c) inside = std::fabs(p[c] - center[c]) <= 0.5 * L;
      if (inside) local.push_back(i);
    }
    if (local.size() < std::max<std::size_t>(n_init, 2)) {
      local.clear();
      for (std::size_t i = epoch_start; i < trace.evals.size(); ++i) local.push_back(i);
    }

    Eigen::VectorXd half = Eigen::VectorXd::Constant(dim, 0.5 * L);
    std::optional<GpModel> model;
    if (local.size() >= 2) {
      try {
        GpFitOptions fo;
        fo.restarts = opt.gp_restarts;
        fo.seed = seed * 1000003u + run.done();
        if (warm) fo.warm_start = &*warm;
        model = fit_gp(rows_of(trace.evals, 0, dim, &local), values_of(trace.evals, 0, &local),
                       opt.family, fo);
        warm = model->kernel();
        const Eigen::VectorXd ls = model->kernel().lengthscales;
        const double geo = std::exp(ls.array().log().mean());
        half = (ls.array() / geo * (0.5 * L)).matrix();
      } catch (const std::exception& e) {
        trace.notes.push_back("eval " + std::to_string(run.done()) +
                              ": GP fit failed, random point in region (" + e.what() + ")");
      }
    }

    Eigen::MatrixXd cand(opt.candidates, dim);
    for (std::size_t c = 0; c < dim; ++c) {
      const double lo = std::clamp(center[c] - half[c], 0.0, 1.0);
      const double hi = std::clamp(center[c] + half[c], 0.0, 1.0);
      for (Eigen::Index r = 0; r < cand.rows(); ++r) cand(r, c) = lo + (hi - lo) * u(rng);
    }
    Eigen::Index pick = 0;
    if (model) {
      const Eigen::VectorXd draw = posterior_sample(*model, cand, rng);
      draw.minCoeff(&pick);
    }
    const auto& e = run.evaluate(row_vector(cand, pick));
    region.record(e.outcome.value < incumbent);
    trace.region_lengths.push_back(region.length());
  }
  return trace;
}

void write_trace_csv(std::ostream& os, const std::vector<std::string>& param_names,
                     const Trace& trace) {
  os << "eval_idx";
  for (const auto& n : param_names) os << ',' << n;
  os << ",ks_stat,eligible,best_so_far\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.evals.size(); ++i) {
    const auto& e = trace.evals[i];
    os << e.index;
    const auto& coords = e.outcome.theta.empty() ? e.unit : e.outcome.theta;
    for (double v : coords) os << ',' << v;
    os << ',' << e.outcome.value << ',' << (e.outcome.eligible ? 1 : 0) << ','
       << trace.best_so_far[i] << '\n';
  }
}

}  // namespace calib
