#pragma once

// Slow reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "calib/order_book.hpp"

namespace oracle {

// Evaluates |F_x - F_y| at every pooled point by counting, O((N+n)^2).
inline double brute_ks(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> pooled(xs);
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const auto nx = static_cast<long long>(xs.size());
  const auto ny = static_cast<long long>(ys.size());
  long long best = 0;
  for (double t : pooled) {
    const long long cx = std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= t; });
    const long long cy = std::count_if(ys.begin(), ys.end(), [&](double v) { return v <= t; });
    best = std::max(best, std::abs(cx * ny - cy * nx));
  }
  return double(best) / (double(nx) * double(ny));
}

inline double critical_value(double N, double n, double alpha, double K) {
  return std::sqrt(-(N + n) * std::log(alpha / (2.0 * K)) / (2.0 * N * n));
}

// Gauss-Jordan with partial pivoting on a dense copy.
template <class T>
std::vector<T> solve(std::vector<std::vector<T>> a, std::vector<T> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const T f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

// Composite Simpson integration of f over [lo, hi] with m (even) panels.
template <class F>
double simpson(F&& f, double lo, double hi, int m) {
  const double h = (hi - lo) / m;
  double s = f(lo) + f(hi);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Expected improvement and probability of improvement by quadrature over the
// Gaussian density of g.
inline double ei_quadrature(double mean, double sd, double best) {
  const double hi = best;
  const double lo = std::min(best, mean) - 12.0 * sd;
  if (hi <= lo) return 0.0;
  return simpson([&](double g) { return (best - g) * normal_pdf((g - mean) / sd) / sd; }, lo, hi, 20000);
}

inline double pi_quadrature(double mean, double sd, double best) {
  const double lo = std::min(best, mean) - 12.0 * sd;
  if (best <= lo) return 0.0;
  return simpson([&](double g) { return normal_pdf((g - mean) / sd) / sd; }, lo, best, 20000);
}

// Naive limit order book: a flat list scanned for the best counterparty.
class NaiveBook {
 public:
  struct Rest {
    calib::OrderId id;
    calib::Side side;
    calib::Price price;
    calib::Qty remaining;
    std::uint64_t seq;
  };

  std::vector<calib::Trade> submit(const calib::Order& o) {
    std::vector<calib::Trade> out;
    calib::Qty left = o.size;
    while (left > 0) {
      Rest* best = nullptr;
      for (auto& r : rests_) {
        if (r.side == o.side) continue;
        if (o.kind == calib::OrderKind::limit) {
          if (o.side == calib::Side::bid && r.price > *o.price) continue;
          if (o.side == calib::Side::ask && r.price < *o.price) continue;
        }
        if (best == nullptr) {
          best = &r;
          continue;
        }
        const bool better_price = o.side == calib::Side::bid ? r.price < best->price : r.price > best->price;
        if (better_price || (r.price == best->price && r.seq < best->seq)) best = &r;
      }
      if (best == nullptr) break;
      const calib::Qty fill = std::min(left, best->remaining);
      calib::Trade t;
      t.time = o.timestamp;
      t.price = best->price;
      t.size = fill;
      t.buy_id = o.side == calib::Side::bid ? o.id : best->id;
      t.sell_id = o.side == calib::Side::bid ? best->id : o.id;
      t.aggressor = o.side;
      out.push_back(t);
      left -= fill;
      best->remaining -= fill;
      if (best->remaining == 0) {
        const auto id = best->id;
        std::erase_if(rests_, [&](const Rest& r) { return r.id == id; });
      }
    }
    if (left > 0 && o.kind == calib::OrderKind::limit) {
      rests_.push_back({o.id, o.side, *o.price, left, seq_++});
    }
    return out;
  }

  bool cancel(calib::OrderId id) { return std::erase_if(rests_, [&](const Rest& r) { return r.id == id; }) > 0; }

  calib::Qty depth_at(calib::Side side, calib::Price price) const {
    calib::Qty q = 0;
    for (const auto& r : rests_) {
      if (r.side == side && r.price == price) q += r.remaining;
    }
    return q;
  }

  std::optional<calib::Price> best(calib::Side side) const {
    std::optional<calib::Price> b;
    for (const auto& r : rests_) {
      if (r.side != side) continue;
      if (!b || (side == calib::Side::bid ? r.price > *b : r.price < *b)) b = r.price;
    }
    return b;
  }

  const std::vector<Rest>& rests() const { return rests_; }

 private:
  std::vector<Rest> rests_;
  std::uint64_t seq_ = 0;
};

// One random order stream step: limits near 1000, some market orders, some
// cancels of earlier ids.
struct RandomFlow {
  std::mt19937_64 rng;
  calib::OrderId next_id = 1;

  explicit RandomFlow(std::uint64_t seed) : rng(seed) {}

  calib::Order next(calib::SimTime t) {
    calib::Order o;
    o.id = next_id++;
    o.timestamp = t;
    o.side = std::bernoulli_distribution(0.5)(rng) ? calib::Side::bid : calib::Side::ask;
    o.kind = std::bernoulli_distribution(0.2)(rng) ? calib::OrderKind::market : calib::OrderKind::limit;
    o.size = std::uniform_int_distribution<calib::Qty>(1, 30)(rng);
    if (o.kind == calib::OrderKind::limit) o.price = std::uniform_int_distribution<calib::Price>(990, 1010)(rng);
    return o;
  }
};

}  // namespace oracle
