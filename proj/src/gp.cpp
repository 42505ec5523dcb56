#include "calib/gp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace calib {

std::string to_string(KernelFamily f) { return f == KernelFamily::rbf ? "rbf" : "matern52"; }

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "rbf") return KernelFamily::rbf;
  if (name == "matern52") return KernelFamily::matern52;
  throw std::invalid_argument("unknown kernel family '" + name + "' (valid: rbf, matern52)");
}

namespace {

double kernel_from_sq_dist(KernelFamily family, double signal, double r2) {
  if (family == KernelFamily::rbf) return signal * std::exp(-0.5 * r2);
  const double r = std::sqrt(std::max(r2, 0.0));
  const double s5r = std::sqrt(5.0) * r;
  return signal * (1.0 + s5r + 5.0 * r2 / 3.0) * std::exp(-s5r);
}

Eigen::MatrixXd scaled(const Eigen::MatrixXd& X, const Eigen::VectorXd& ls) {
  return X * ls.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd sq_dist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * a * b.transpose()).colwise() + na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

struct Factorization {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

// Cholesky of K + noise*I with jitter escalation 0, 1e-10, 1e-9, ..., 1e-4.
bool factorize(Eigen::MatrixXd K, double noise, Factorization& out) {
  K.diagonal().array() += noise;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd A = K;
    if (jitter > 0.0) A.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      out.lower = llt.matrixL();
      out.matrix = std::move(A);
      out.jitter = jitter;
      return true;
    }
    if (jitter == 0.0) {
      jitter = kJitterStart;
    } else if (jitter < kJitterMax * 0.5) {
      jitter *= 10.0;
    } else {
      return false;
    }
  }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2, bool same_training_point) {
  const double r2 = ((x - x2).array() / spec.lengthscales.array()).square().sum();
  double k = kernel_from_sq_dist(spec.family, spec.signal_variance, r2);
  if (same_training_point) k += spec.noise_variance;
  return k;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d = sq_dist(scaled(a, spec.lengthscales), scaled(b, spec.lengthscales));
  return d.unaryExpr(
      [&](double r2) { return kernel_from_sq_dist(spec.family, spec.signal_variance, r2); });
}

GpModel GpModel::condition_standardized(KernelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y_std,
                                        double mean_std, double shift, double scale) {
  if (X.rows() != y_std.size()) throw std::invalid_argument("X and y sizes differ");
  if (X.rows() > 0 && X.cols() != spec.lengthscales.size()) {
    throw std::invalid_argument("lengthscale count does not match input dimension");
  }
  GpModel m;
  m.spec_ = std::move(spec);
  m.X_ = std::move(X);
  m.y_ = std::move(y_std);
  m.mean_ = mean_std;
  m.shift_ = shift;
  m.scale_ = scale;
  const auto n = m.X_.rows();
  if (n == 0) {
    m.alpha_.resize(0);
    m.chol_.resize(0, 0);
    m.lml_ = 0.0;
    return m;
  }
  Factorization f;
  if (!factorize(kernel_matrix(m.spec_, m.X_, m.X_), m.spec_.noise_variance, f)) {
    throw std::runtime_error("GP covariance is singular even with maximal jitter");
  }
  m.chol_ = std::move(f.lower);
  m.cov_ = std::move(f.matrix);
  m.jitter_ = f.jitter;
  const auto L = m.chol_.triangularView<Eigen::Lower>();
  const Eigen::VectorXd resid = m.y_.array() - m.mean_;
  const Eigen::VectorXd z = L.solve(resid);
  m.alpha_ = m.solve(resid);
  m.lml_ = -0.5 * z.squaredNorm() - m.chol_.diagonal().array().log().sum() -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  return m;
}

GpModel GpModel::condition(KernelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y,
                           double mean_constant) {
  return condition_standardized(std::move(spec), std::move(X), std::move(y), mean_constant, 0.0,
                                1.0);
}

GpModel GpModel::prior(KernelSpec spec, double mean_constant) {
  const auto d = spec.lengthscales.size();
  return condition(std::move(spec), Eigen::MatrixXd(0, d), Eigen::VectorXd(0), mean_constant);
}

Eigen::VectorXd GpModel::solve(const Eigen::VectorXd& rhs) const {
  const auto L = chol_.triangularView<Eigen::Lower>();
  const auto U = chol_.transpose().triangularView<Eigen::Upper>();
  Eigen::VectorXd x = U.solve(L.solve(rhs));
  // One refinement step recovers most of the accuracy lost on near-singular
  // covariances.
  const Eigen::VectorXd r = rhs - cov_ * x;
  x += U.solve(L.solve(r));
  return x;
}

Prediction GpModel::posterior(const Eigen::Ref<const Eigen::VectorXd>& x, bool include_noise) const {
  double mean = mean_;
  double var = spec_.signal_variance;
  if (size() > 0) {
    const Eigen::MatrixXd xq = x.transpose();
    const Eigen::VectorXd k = kernel_matrix(spec_, X_, xq).col(0);
    mean += k.dot(alpha_);
    var -= k.dot(solve(k));
  }
  var = std::max(var, 0.0);
  if (include_noise) var += spec_.noise_variance;
  return Prediction{shift_ + scale_ * mean, scale_ * scale_ * var};
}

JointPrediction GpModel::posterior_joint(const Eigen::MatrixXd& points) const {
  JointPrediction out;
  out.covariance = kernel_matrix(spec_, points, points);
  out.mean = Eigen::VectorXd::Constant(points.rows(), mean_);
  if (size() > 0) {
    const Eigen::MatrixXd Ks = kernel_matrix(spec_, X_, points);
    out.mean += Ks.transpose() * alpha_;
    const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Ks);
    out.covariance.noalias() -= V.transpose() * V;
  }
  out.mean = (out.mean.array() * scale_ + shift_).matrix();
  out.covariance *= scale_ * scale_;
  return out;
}

namespace {

struct Hyper {
  Eigen::VectorXd log_ls;
  double log_signal = 0.0;
  double log_noise = 0.0;
};

struct FitContext {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  KernelFamily family;
  const GpFitOptions& opt;
  GpFitReport& report;
};

KernelSpec to_spec(const Hyper& h, KernelFamily family) {
  KernelSpec s;
  s.family = family;
  s.lengthscales = h.log_ls.array().exp();
  s.signal_variance = std::exp(h.log_signal);
  s.noise_variance = std::exp(h.log_noise);
  return s;
}

// Profiled log marginal likelihood; -inf when the covariance will not factorize.
double profiled_lml(const Hyper& h, FitContext& ctx, double* mean_out = nullptr) {
  ++ctx.report.candidates_tried;
  const KernelSpec spec = to_spec(h, ctx.family);
  Factorization f;
  if (!factorize(kernel_matrix(spec, ctx.X, ctx.X), spec.noise_variance, f)) {
    ++ctx.report.failed_candidates;
    return -std::numeric_limits<double>::infinity();
  }
  const auto L = f.lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.y.size());
  const Eigen::VectorXd zy = L.solve(ctx.y);
  const Eigen::VectorXd z1 = L.solve(ones);
  const double mean = zy.dot(z1) / z1.squaredNorm();
  const Eigen::VectorXd z = zy - mean * z1;
  const double lml = -0.5 * z.squaredNorm() - f.lower.diagonal().array().log().sum() -
                     0.5 * static_cast<double>(ctx.y.size()) * std::log(2.0 * std::numbers::pi);
  if (mean_out) *mean_out = mean;
  ctx.report.max_tried_lml = std::max(ctx.report.max_tried_lml, lml);
  return lml;
}

}  // namespace

GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
               const GpFitOptions& opt, GpFitReport* report_out) {
  if (X.rows() < 2) throw std::invalid_argument("GP fit needs at least 2 training points");
  if (X.rows() != y.size()) throw std::invalid_argument("X and y sizes differ");
  const auto d = X.cols();

  const double shift = y.mean();
  const double var = (y.array() - shift).square().sum() / static_cast<double>(y.size());
  const double scale = var > 1e-300 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd ys = (y.array() - shift) / scale;

  GpFitReport report;
  report.max_tried_lml = -std::numeric_limits<double>::infinity();
  FitContext ctx{X, ys, family, opt, report};

  const double lo_ls = std::log(opt.lengthscale_min), hi_ls = std::log(opt.lengthscale_max);
  const double lo_s = std::log(opt.signal_min), hi_s = std::log(opt.signal_max);
  const double lo_n = std::log(opt.noise_min), hi_n = std::log(opt.noise_max);
  const auto n_coords = d + 2;
  auto coord_bounds = [&](Eigen::Index c) -> std::pair<double, double> {
    if (c < d) return {lo_ls, hi_ls};
    if (c == d) return {lo_s, hi_s};
    return {lo_n, hi_n};
  };
  auto coord = [&](Hyper& h, Eigen::Index c) -> double& {
    if (c < d) return h.log_ls[c];
    if (c == d) return h.log_signal;
    return h.log_noise;
  };

  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Hyper best;
  double best_lml = -std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(opt.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Hyper h;
    h.log_ls.resize(d);
    if (r == 0 && opt.warm_start != nullptr && opt.warm_start->lengthscales.size() == d) {
      h.log_ls = opt.warm_start->lengthscales.array().log();
      h.log_signal = std::log(opt.warm_start->signal_variance);
      h.log_noise = std::log(std::max(opt.warm_start->noise_variance, opt.noise_min));
    } else if (r == 0) {
      h.log_ls.setConstant(std::log(0.3));
      h.log_signal = 0.0;
      h.log_noise = std::log(1e-2);
    } else {
      for (Eigen::Index c = 0; c < n_coords; ++c) {
        const auto [lo, hi] = coord_bounds(c);
        coord(h, c) = lo + (hi - lo) * unif(rng);
      }
    }
    for (Eigen::Index c = 0; c < n_coords; ++c) {
      const auto [lo, hi] = coord_bounds(c);
      coord(h, c) = std::clamp(coord(h, c), lo, hi);
    }

    double cur = profiled_lml(h, ctx);
    double step = opt.initial_step;
    for (std::size_t sweep = 0; sweep < opt.max_sweeps && step >= opt.min_step; ++sweep) {
      bool improved = false;
      for (Eigen::Index c = 0; c < n_coords; ++c) {
        const auto [lo, hi] = coord_bounds(c);
        for (double dir : {1.0, -1.0}) {
          Hyper trial = h;
          double& v = coord(trial, c);
          const double moved = std::clamp(v + dir * step, lo, hi);
          if (moved == v) continue;
          v = moved;
          const double lml = profiled_lml(trial, ctx);
          if (lml > cur) {
            cur = lml;
            h = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur > best_lml) {
      best_lml = cur;
      best = h;
    }
  }
  if (!std::isfinite(best_lml)) {
    throw std::runtime_error("GP fit failed: no hyperparameter candidate factorized");
  }
  double mean = 0.0;
  profiled_lml(best, ctx, &mean);
  report.best_lml = best_lml;
  GpModel model =
      GpModel::condition_standardized(to_spec(best, family), X, ys, mean, shift, scale);
  if (report_out) *report_out = report;
  return model;
}

Eigen::VectorXd posterior_sample(const GpModel& model, const Eigen::MatrixXd& points,
                                 std::mt19937_64& rng) {
  const JointPrediction joint = model.posterior_joint(points);
  const auto m = points.rows();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(joint.covariance);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("posterior covariance factorization failed");
  std::normal_distribution<double> z;
  Eigen::VectorXd w(m);
  const Eigen::VectorXd D = ldlt.vectorD();
  for (Eigen::Index i = 0; i < m; ++i) w[i] = std::sqrt(std::max(D[i], 0.0)) * z(rng);
  // cov = P^T L D L^T P, so P^T L sqrt(D) w has the right covariance.
  Eigen::VectorXd v = ldlt.matrixL() * w;
  v = ldlt.transpositionsP().transpose() * v;
  return joint.mean + v;
}

void write_model_summary(std::ostream& os, const GpModel& model) {
  const auto& k = model.kernel();
  os << std::setprecision(10) << "family = " << to_string(k.family) << '\n'
     << "signal_variance = " << k.signal_variance << '\n'
     << "noise_variance = " << k.noise_variance << '\n'
     << "mean_constant = " << model.mean_constant() << '\n'
     << "output_scale = " << model.output_scale() << '\n'
     << "log_marginal_likelihood = " << model.log_marginal_likelihood() << '\n'
     << "lengthscales =";
  for (Eigen::Index i = 0; i < k.lengthscales.size(); ++i) os << ' ' << k.lengthscales[i];
  os << '\n';
}

}  // namespace calib
