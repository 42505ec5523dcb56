#include "calib/ksdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace calib {

namespace {

void check_sample(std::span<const double> v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + " sample is empty");
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " sample has NaN/inf");
  }
}

}  // namespace

double one_dim_ks_sorted(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n_x = xs.size();
  const std::size_t n_y = ys.size();
  std::size_t i = 0;
  std::size_t j = 0;
  // |i/n_x - j/n_y| = |i*n_y - j*n_x| / (n_x*n_y); tracking the integer
  // numerator keeps the result a single correctly rounded division.
  std::uint64_t best = 0;
  // At each distinct pooled value advance both samples past it, then compare
  // the CDFs there. The value just before a jump equals the value at the
  // previous pooled point, so this covers every candidate for the sup.
  while (i < n_x && j < n_y) {
    const double v = std::min(xs[i], ys[j]);
    while (i < n_x && xs[i] <= v) ++i;
    while (j < n_y && ys[j] <= v) ++j;
    const std::uint64_t a = std::uint64_t(i) * n_y;
    const std::uint64_t b = std::uint64_t(j) * n_x;
    best = std::max(best, a > b ? a - b : b - a);
  }
  return static_cast<double>(best) / (static_cast<double>(n_x) * static_cast<double>(n_y));
}

double one_dim_ks(std::span<const double> xs, std::span<const double> ys) {
  check_sample(xs, "first");
  check_sample(ys, "second");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return one_dim_ks_sorted(a, b);
}

double critical_value(std::size_t n_real, std::size_t n_sim, double alpha, std::size_t dims) {
  if (n_real == 0 || n_sim == 0) throw std::invalid_argument("sample counts must be >= 1");
  if (dims == 0) throw std::invalid_argument("dimension count must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  const double level = alpha / (2.0 * static_cast<double>(dims));
  if (!(level < 1.0)) throw std::invalid_argument("alpha / 2K must be below 1");
  const double N = static_cast<double>(n_real);
  const double n = static_cast<double>(n_sim);
  return std::sqrt(-(N + n) * std::log(level) / (2.0 * N * n));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t m = std::min(a.size(), b.size());
  if (m < 2) return 0.0;
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(m);
  mb /= double(m);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> stylized_features(const SeriesSample& sample) {
  const std::size_t B = sample.buckets();
  if (B < 3) throw std::invalid_argument("stylized features need at least 3 buckets");
  const auto r = sample.returns();
  const auto v = sample.volumes();

  std::vector<double> sq(B);
  std::vector<double> abs_r(B);
  double mean = 0.0;
  for (std::size_t t = 0; t < B; ++t) {
    sq[t] = r[t] * r[t];
    abs_r[t] = std::fabs(r[t]);
    mean += r[t];
  }
  mean /= double(B);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : r) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= double(B);
  m4 /= double(B);
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  const std::span<const double> sq_span(sq);
  return {
      pearson(r.first(B - 1), r.subspan(1)),
      kurtosis,
      pearson(sq_span.first(B - 1), sq_span.subspan(1)),
      pearson(v, abs_r),
  };
}

FeatureExtractor FeatureExtractor::identity() { return FeatureExtractor{}; }

FeatureExtractor FeatureExtractor::stylized_facts() {
  FeatureExtractor f;
  f.variant_ = Variant::stylized_facts;
  f.name_ = "stylized_facts";
  f.dim_ = 4;
  return f;
}

FeatureExtractor FeatureExtractor::custom(std::string name, std::size_t output_dim, Fn fn) {
  if (!fn || output_dim == 0) throw std::invalid_argument("custom extractor needs a function");
  FeatureExtractor f;
  f.variant_ = Variant::custom;
  f.name_ = std::move(name);
  f.dim_ = output_dim;
  f.fn_ = std::move(fn);
  return f;
}

FeatureExtractor FeatureExtractor::from_name(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "stylized_facts") return stylized_facts();
  throw std::invalid_argument("unknown feature extractor '" + name +
                              "' (valid: identity, stylized_facts)");
}

std::size_t FeatureExtractor::output_dim(std::size_t sample_length) const {
  return variant_ == Variant::identity ? sample_length : dim_;
}

std::vector<double> FeatureExtractor::apply(const SeriesSample& sample) const {
  switch (variant_) {
    case Variant::identity:
      return sample.values;
    case Variant::stylized_facts:
      return stylized_features(sample);
    case Variant::custom: {
      auto out = fn_(sample);
      if (out.size() != dim_) throw std::runtime_error("custom extractor returned wrong size");
      return out;
    }
  }
  return {};
}

namespace {

std::vector<std::vector<double>> feature_columns(const SampleSet& set, const FeatureExtractor& f,
                                                 std::size_t length) {
  const std::size_t K = f.output_dim(length);
  std::vector<std::vector<double>> cols(K, std::vector<double>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].values.size() != length) {
      throw std::invalid_argument("sample " + std::to_string(i) + " has length " +
                                  std::to_string(set[i].values.size()) + ", expected " +
                                  std::to_string(length));
    }
    const auto feat = f.apply(set[i]);
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(feat[k])) throw std::invalid_argument("non-finite feature value");
      cols[k][i] = feat[k];
    }
  }
  for (auto& c : cols) std::sort(c.begin(), c.end());
  return cols;
}

}  // namespace

PreparedReference::PreparedReference(const SampleSet& real, FeatureExtractor extractor)
    : extractor_(std::move(extractor)) {
  if (real.empty()) throw std::invalid_argument("reference sample set is empty");
  count_ = real.size();
  sample_length_ = real.front().values.size();
  columns_ = feature_columns(real, extractor_, sample_length_);
}

KsResult ks_distance(const PreparedReference& real, const SampleSet& sim, double alpha) {
  if (sim.empty()) throw std::invalid_argument("simulated sample set is empty");
  const auto cols = feature_columns(sim, real.extractor(), real.sample_length());
  KsResult r;
  r.per_dim.resize(real.dims());
  for (std::size_t k = 0; k < real.dims(); ++k) {
    r.per_dim[k] = one_dim_ks_sorted(real.column(k), cols[k]);
    if (r.per_dim[k] > r.statistic) {
      r.statistic = r.per_dim[k];
      r.argmax_dim = k;
    }
  }
  r.critical_value = critical_value(real.size(), sim.size(), alpha, real.dims());
  r.eligible = r.statistic < r.critical_value;
  return r;
}

KsResult ks_distance(const SampleSet& real, const SampleSet& sim, const FeatureExtractor& f,
                     double alpha) {
  return ks_distance(PreparedReference(real, f), sim, alpha);
}

void write_ks_record(std::ostream& os, const KsResult& r) {
  os << std::setprecision(17) << "statistic,critical_value,eligible,argmax_dim\n"
     << r.statistic << ',' << r.critical_value << ',' << (r.eligible ? 1 : 0) << ','
     << r.argmax_dim << '\n';
}

void write_ks_per_dim(std::ostream& os, const KsResult& r) {
  os << std::setprecision(17) << "dim,statistic\n";
  for (std::size_t k = 0; k < r.per_dim.size(); ++k) os << k << ',' << r.per_dim[k] << '\n';
}

}  // namespace calib
