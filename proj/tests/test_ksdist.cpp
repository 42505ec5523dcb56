#include "doctest.h"

#include <cmath>
#include <random>

#include "calib/ksdist.hpp"
#include "oracles.hpp"

using namespace calib;

namespace {

SampleSet from_rows(const std::vector<std::vector<double>>& rows) {
  SampleSet s;
  for (const auto& r : rows) s.push_back(SeriesSample{r});
  return s;
}

}  // namespace

TEST_CASE("one-dimensional statistic") {
  CHECK(one_dim_ks(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
  CHECK(one_dim_ks(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1}) == 1.0);
  CHECK(one_dim_ks(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2.5, 3.5}) == doctest::Approx(0.5));
  CHECK(one_dim_ks(std::vector<double>{3, 1, 2}, std::vector<double>{2, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(one_dim_ks(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(one_dim_ks(std::vector<double>{NAN}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(one_dim_ks(std::vector<double>{1}, std::vector<double>{INFINITY}), std::invalid_argument);
}

TEST_CASE("one-dimensional statistic properties") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 15);
  std::uniform_int_distribution<int> level(-3, 3);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(size(rng)));
    std::vector<double> y(static_cast<std::size_t>(size(rng)));
    for (auto& v : x) v = level(rng);
    for (auto& v : y) v = level(rng) + 0.5 * (trial % 2);
    const double d = one_dim_ks(x, y);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == oracle::brute_ks(x, y));
    CHECK(d == one_dim_ks(y, x));
    // Strictly increasing transform leaves the statistic unchanged.
    std::vector<double> ex(x);
    std::vector<double> ey(y);
    for (auto& v : ex) v = std::exp(v) * 3.0 - 1.0;
    for (auto& v : ey) v = std::exp(v) * 3.0 - 1.0;
    CHECK(one_dim_ks(ex, ey) == doctest::Approx(d).epsilon(1e-15));
  }
}

TEST_CASE("critical value") {
  CHECK(critical_value(1000, 1000, 0.05, 1) == doctest::Approx(std::sqrt(-2000.0 * std::log(0.025) / 2e6)).epsilon(1e-14));
  CHECK(critical_value(1000, 1000, 0.05, 1) == doctest::Approx(0.06073).epsilon(1e-4));
  CHECK(critical_value(1000, 50, 0.05, 720) ==
        doctest::Approx(std::sqrt(1050.0 * std::log(28800.0) / 100000.0)).epsilon(1e-14));
  for (std::size_t K = 1; K < 2000; K *= 2) {
    CHECK(critical_value(100, 20, 0.05, 2 * K) > critical_value(100, 20, 0.05, K));
  }
  CHECK_THROWS(critical_value(0, 10, 0.05, 1));
  CHECK_THROWS(critical_value(10, 10, 0.0, 1));
  CHECK_THROWS(critical_value(10, 10, 1.0, 1));
  CHECK_THROWS(critical_value(10, 10, 0.05, 0));
}

TEST_CASE("multivariate distance") {
  SUBCASE("identical sets") {
    const auto s = from_rows({{1, 2}, {3, 4}, {5, 6}});
    const auto r = ks_distance(s, s, FeatureExtractor::identity(), 0.05);
    CHECK(r.statistic == 0.0);
    CHECK(r.eligible);
    CHECK(r.per_dim.size() == 2);
  }
  SUBCASE("second dimension disjoint") {
    std::vector<std::vector<double>> ra, rb;
    for (int i = 0; i < 20; ++i) {
      ra.push_back({double(i), 0.0});
      rb.push_back({double(i), 5.0 + i});
    }
    const auto a = from_rows(ra);
    const auto b = from_rows(rb);
    const auto r = ks_distance(a, b, FeatureExtractor::identity(), 0.05);
    CHECK(r.statistic == 1.0);
    CHECK(r.argmax_dim == 1);
    CHECK_FALSE(r.eligible);
  }
  SUBCASE("max of per-dimension oracles") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> ra(5, std::vector<double>(3));
    std::vector<std::vector<double>> rb(5, std::vector<double>(3));
    for (auto& row : ra) for (auto& v : row) v = z(rng);
    for (auto& row : rb) for (auto& v : row) v = z(rng) + 0.7;
    const auto r = ks_distance(from_rows(ra), from_rows(rb), FeatureExtractor::identity(), 0.05);
    double want = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < 5; ++i) {
        x.push_back(ra[i][k]);
        y.push_back(rb[i][k]);
      }
      CHECK(r.per_dim[k] == oracle::brute_ks(x, y));
      want = std::max(want, oracle::brute_ks(x, y));
    }
    CHECK(r.statistic == want);
    CHECK(r.critical_value == critical_value(5, 5, 0.05, 3));
    CHECK(r.eligible == (r.statistic < r.critical_value));
  }
  SUBCASE("eligibility is strict") {
    // N = n = 1 gives q = sqrt(ln(2K/alpha)); pick alpha so that q is exactly 1.
    const auto a = from_rows({{0.0}});
    const auto b = from_rows({{1.0}});
    const double alpha = 2.0 * std::exp(-1.0);
    const auto r = ks_distance(a, b, FeatureExtractor::identity(), alpha);
    CHECK(r.statistic == 1.0);
    CHECK(r.critical_value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.eligible == (1.0 < r.critical_value));
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS(ks_distance(from_rows({{1, 2}}), from_rows({{1}}), FeatureExtractor::identity(), 0.05));
    CHECK_THROWS(ks_distance(from_rows({{1}}), SampleSet{}, FeatureExtractor::identity(), 0.05));
  }
  SUBCASE("prepared reference matches direct evaluation") {
    const auto a = from_rows({{1, 2}, {3, 1}, {0, 0}});
    const auto b = from_rows({{2, 2}, {5, 5}});
    const PreparedReference ref(a, FeatureExtractor::identity());
    CHECK(ref.size() == 3);
    CHECK(ref.dims() == 2);
    const auto r1 = ks_distance(ref, b, 0.1);
    const auto r2 = ks_distance(a, b, FeatureExtractor::identity(), 0.1);
    CHECK(r1.per_dim == r2.per_dim);
  }
}

TEST_CASE("stylized features") {
  SUBCASE("alternating returns") {
    std::vector<double> v;
    for (int i = 0; i < 10; ++i) v.push_back(i % 2 ? -1.0 : 1.0);
    for (int i = 0; i < 10; ++i) v.push_back(1.0 + i);
    const auto f = stylized_features(SeriesSample{v});
    const std::vector<double> r(v.begin(), v.begin() + 10);
    const std::vector<double> a(r.begin(), r.end() - 1);
    const std::vector<double> b(r.begin() + 1, r.end());
    CHECK(f[0] == doctest::Approx(-1.0));
    CHECK(f[0] == doctest::Approx(pearson(a, b)));
    CHECK(f[1] == doctest::Approx(1.0));
  }
  SUBCASE("constant returns hit the zero-variance rule") {
    std::vector<double> v(20, 0.5);
    const auto f = stylized_features(SeriesSample{v});
    for (double x : f) CHECK(x == 0.0);
  }
  SUBCASE("volume equal to absolute return") {
    std::vector<double> r{0.1, -0.3, 0.2, -0.05, 0.4, 0.0};
    std::vector<double> v(r);
    for (double x : r) v.push_back(std::abs(x));
    const auto f = stylized_features(SeriesSample{v});
    CHECK(f[3] == doctest::Approx(1.0));
  }
  SUBCASE("extractor plumbing") {
    const auto f = FeatureExtractor::from_name("stylized_facts");
    CHECK(f.output_dim(300) == 4);
    CHECK(FeatureExtractor::identity().output_dim(300) == 300);
    CHECK_THROWS(FeatureExtractor::from_name("autoencoder"));
    const auto c = FeatureExtractor::custom("sum", 1, [](const SeriesSample& s) {
      double t = 0;
      for (double x : s.values) t += x;
      return std::vector<double>{t};
    });
    CHECK(c.apply(SeriesSample{{1, 2, 3}})[0] == 6.0);
    CHECK_THROWS(stylized_features(SeriesSample{{1, 2}}));
  }
}

TEST_CASE("pearson") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{3, 2, 1}) == 0.0);
  CHECK(pearson(std::vector<double>{1}, std::vector<double>{3}) == 0.0);
}
