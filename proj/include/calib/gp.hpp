#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

namespace calib {

enum class KernelFamily { rbf, matern52 };

std::string to_string(KernelFamily f);
KernelFamily parse_kernel_family(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 0.0;  // white-noise term on the training diagonal
};

// k(x, x'). The noise term is added only when `same_training_point` is set.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2, bool same_training_point = false);

// Noise-free cross covariance between the rows of `a` and the rows of `b`.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct JointPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Exact GP posterior given training rows X (one point per row) and targets y
// under a constant prior mean. Immutable once built.
class GpModel {
 public:
  // Conditions on (X, y) with fixed hyperparameters; y is used as given.
  static GpModel condition(KernelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y,
                           double mean_constant);
  static GpModel prior(KernelSpec spec, double mean_constant);

  const KernelSpec& kernel() const noexcept { return spec_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(X_.rows()); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(spec_.lengthscales.size()); }
  const Eigen::MatrixXd& train_x() const noexcept { return X_; }
  // Prior mean and target scaling in the caller's units.
  double mean_constant() const noexcept { return shift_ + scale_ * mean_; }
  double output_scale() const noexcept { return scale_; }
  // Log marginal likelihood in the model's internal (standardized) units.
  double log_marginal_likelihood() const noexcept { return lml_; }
  double jitter() const noexcept { return jitter_; }

  // Latent posterior of g(x); add the noise variance when include_noise is set.
  Prediction posterior(const Eigen::Ref<const Eigen::VectorXd>& x, bool include_noise = false) const;
  JointPrediction posterior_joint(const Eigen::MatrixXd& points) const;

  // Builds a model whose targets were standardized as (y - shift) / scale.
  static GpModel condition_standardized(KernelSpec spec, Eigen::MatrixXd X, Eigen::VectorXd y_std,
                                        double mean_std, double shift, double scale);

 private:
  KernelSpec spec_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  double mean_ = 0.0;
  double shift_ = 0.0;
  double scale_ = 1.0;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;  // (K + (noise + jitter) I)^-1 rhs

  Eigen::MatrixXd cov_;   // K + (noise + jitter) I
  Eigen::MatrixXd chol_;  // its lower Cholesky factor
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

struct GpFitOptions {
  std::size_t restarts = 5;
  double lengthscale_min = 0.005;
  double lengthscale_max = 2.0;
  double signal_min = 0.05;
  double signal_max = 20.0;
  double noise_min = 1e-6;
  double noise_max = 1.0;
  std::size_t max_sweeps = 60;
  double initial_step = 1.0;  // natural-log units
  double min_step = 0.02;
  std::uint64_t seed = 0;
  // Optional first start (lengthscales, signal, noise) from a previous fit.
  const KernelSpec* warm_start = nullptr;
};

struct GpFitReport {
  double best_lml = 0.0;
  double max_tried_lml = 0.0;
  std::size_t candidates_tried = 0;
  std::size_t failed_candidates = 0;
};

// Standardizes y, then maximizes the log marginal likelihood over
// log-lengthscales, log signal variance and log noise variance by multi-start
// coordinate ascent. The constant mean is profiled out in closed form.
// Requires at least 2 rows; throws std::runtime_error when no candidate factorizes.
GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
               const GpFitOptions& options = {}, GpFitReport* report = nullptr);

// One joint draw of g over the rows of `points`. Uses a pivoted LDLT of the
// posterior covariance so rank-deficient covariances (points on noise-free
// training data) are sampled exactly.
Eigen::VectorXd posterior_sample(const GpModel& model, const Eigen::MatrixXd& points,
                                 std::mt19937_64& rng);

void write_model_summary(std::ostream& os, const GpModel& model);

}  // namespace calib
