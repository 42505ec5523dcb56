#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calib/simulator.hpp"

namespace calib {

// Exact two-sample K-S statistic sup_x |F_x(x) - F_y(x)| between the
// right-continuous empirical CDFs. Throws std::invalid_argument on empty or
// non-finite input.
double one_dim_ks(std::span<const double> xs, std::span<const double> ys);

// Same statistic for inputs already sorted ascending (not re-checked).
double one_dim_ks_sorted(std::span<const double> xs, std::span<const double> ys);

// Bonferroni-corrected approximate critical value for the max over K
// per-dimension statistics: sqrt(-(N+n) log(alpha / 2K) / (2 N n)).
double critical_value(std::size_t n_real, std::size_t n_sim, double alpha, std::size_t dims);

// Lag-1 return autocorrelation, return kurtosis (m4/m2^2), lag-1 squared-return
// autocorrelation, corr(V_t, |r_t|). Zero-variance correlations are 0, as is
// the kurtosis of a constant series.
std::vector<double> stylized_features(const SeriesSample& sample);

double pearson(std::span<const double> a, std::span<const double> b);

class FeatureExtractor {
 public:
  enum class Variant { identity, stylized_facts, custom };
  using Fn = std::function<std::vector<double>(const SeriesSample&)>;

  static FeatureExtractor identity();
  static FeatureExtractor stylized_facts();
  static FeatureExtractor custom(std::string name, std::size_t output_dim, Fn fn);
  static FeatureExtractor from_name(const std::string& name);  // identity | stylized_facts

  Variant variant() const noexcept { return variant_; }
  const std::string& name() const noexcept { return name_; }

  // K for a raw sample of length O.
  std::size_t output_dim(std::size_t sample_length) const;
  std::vector<double> apply(const SeriesSample& sample) const;

 private:
  Variant variant_ = Variant::identity;
  std::string name_ = "identity";
  std::size_t dim_ = 0;
  Fn fn_;
};

struct KsResult {
  double statistic = 0.0;
  std::vector<double> per_dim;
  std::size_t argmax_dim = 0;  // 0-based
  double critical_value = 0.0;
  bool eligible = true;
};

// Features of the real set, sorted per dimension once so repeated distance
// evaluations against new simulated sets only sort the simulated side.
class PreparedReference {
 public:
  PreparedReference(const SampleSet& real, FeatureExtractor extractor);

  std::size_t size() const noexcept { return count_; }
  std::size_t dims() const noexcept { return columns_.size(); }
  std::size_t sample_length() const noexcept { return sample_length_; }
  const FeatureExtractor& extractor() const noexcept { return extractor_; }
  std::span<const double> column(std::size_t k) const { return columns_[k]; }

 private:
  FeatureExtractor extractor_;
  std::size_t count_ = 0;
  std::size_t sample_length_ = 0;
  std::vector<std::vector<double>> columns_;
};

KsResult ks_distance(const PreparedReference& real, const SampleSet& sim, double alpha);
KsResult ks_distance(const SampleSet& real, const SampleSet& sim, const FeatureExtractor& f,
                     double alpha);

// `statistic,critical_value,eligible,argmax_dim` header plus one row.
void write_ks_record(std::ostream& os, const KsResult& r);
// `dim,statistic` rows.
void write_ks_per_dim(std::ostream& os, const KsResult& r);

}  // namespace calib
