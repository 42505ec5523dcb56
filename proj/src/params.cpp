#include "calib/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace calib {

std::string_view to_string(Scale s) noexcept { return s == Scale::log ? "log" : "linear"; }

Scale parse_scale(std::string_view text) {
  if (text == "log") return Scale::log;
  if (text == "linear") return Scale::linear;
  throw ConfigError("scale must be 'linear' or 'log', got '" + std::string(text) + "'");
}

namespace {

long long to_ll(double v) { return static_cast<long long>(std::llround(v)); }

#define CALIB_VALUE_GROUP(K)                                                                 \
  ParamInfo{"num_value_" #K, ParamKind::count, true, 0, K == 1 ? 200 : 50, Scale::linear,     \
            [](const SimConfig& c) { return double(c.value_groups[K - 1].count); },         \
            [](SimConfig& c, double v) { c.value_groups[K - 1].count = int(to_ll(v)); }},   \
      ParamInfo{"lambda_a_" #K, ParamKind::rate, true, 1e-16, 2e-12, Scale::log,             \
                [](const SimConfig& c) { return c.value_groups[K - 1].arrival_rate; },       \
                [](SimConfig& c, double v) { c.value_groups[K - 1].arrival_rate = v; }},     \
      ParamInfo{"min_size_value_" #K, ParamKind::size, true, K == 1 ? 6 : K == 2 ? 76 : 176, \
                K == 1 ? 34 : K == 2 ? 124 : 224, Scale::linear,                             \
                [](const SimConfig& c) { return double(c.value_groups[K - 1].min_size); },   \
                [](SimConfig& c, double v) { c.value_groups[K - 1].min_size = to_ll(v); }},  \
      ParamInfo{"max_size_value_" #K, ParamKind::size, true, K == 1 ? 36 : K == 2 ? 126 : 226, \
                K == 1 ? 64 : K == 2 ? 174 : 274, Scale::linear,                             \
                [](const SimConfig& c) { return double(c.value_groups[K - 1].max_size); },   \
                [](SimConfig& c, double v) { c.value_groups[K - 1].max_size = to_ll(v); }}

#define CALIB_FIELD(NAME, KIND, CAL, LO, HI, SCALE, FIELD, CAST)                          \
  ParamInfo {                                                                            \
    NAME, KIND, CAL, LO, HI, SCALE, [](const SimConfig& c) { return double(c.FIELD); },  \
        [](SimConfig& c, double v) { c.FIELD = CAST(v); }                                \
  }

double identity(double v) { return v; }
int to_int(double v) { return int(to_ll(v)); }

const std::array kParams{
    CALIB_VALUE_GROUP(1),
    CALIB_VALUE_GROUP(2),
    CALIB_VALUE_GROUP(3),
    CALIB_FIELD("num_noise", ParamKind::count, true, 2500, 7500, Scale::linear, num_noise, to_int),
    CALIB_FIELD("min_size_noise", ParamKind::size, true, 6, 34, Scale::linear, min_size_noise,
                to_ll),
    CALIB_FIELD("max_size_noise", ParamKind::size, true, 36, 64, Scale::linear, max_size_noise,
                to_ll),
    CALIB_FIELD("r_bar", ParamKind::price, true, 1e2, 2e5, Scale::log, r_bar, to_ll),
    CALIB_FIELD("kappa", ParamKind::rate, true, 1e-16, 3e-12, Scale::log, kappa, identity),
    CALIB_FIELD("fund_vol", ParamKind::real, true, 1e-8, 1.0, Scale::log, fund_vol, identity),
    CALIB_FIELD("num_mm", ParamKind::count, false, 0, 0, Scale::linear, num_mm, to_int),
    CALIB_FIELD("mm_rate", ParamKind::duration, false, 0, 0, Scale::linear, mm_rate, to_ll),
    CALIB_FIELD("mm_size", ParamKind::size, false, 0, 0, Scale::linear, mm_size, to_ll),
    CALIB_FIELD("mm_half_spread", ParamKind::price, false, 0, 0, Scale::linear, mm_half_spread,
                to_ll),
    CALIB_FIELD("value_obs_noise", ParamKind::real, false, 0, 0, Scale::linear, value_obs_noise,
                identity),
    CALIB_FIELD("value_price_improvement", ParamKind::price, false, 0, 0, Scale::linear,
                value_price_improvement, to_ll),
    CALIB_FIELD("seed_order_size", ParamKind::size, false, 0, 0, Scale::linear, seed_order_size,
                to_ll),
    CALIB_FIELD("session_open", ParamKind::clock, false, 0, 0, Scale::linear, session_open, to_ll),
    CALIB_FIELD("session_close", ParamKind::clock, false, 0, 0, Scale::linear, session_close,
                to_ll),
    CALIB_FIELD("series_start", ParamKind::clock, false, 0, 0, Scale::linear, series_start, to_ll),
    CALIB_FIELD("series_end", ParamKind::clock, false, 0, 0, Scale::linear, series_end, to_ll),
    CALIB_FIELD("sampling_interval", ParamKind::duration, false, 0, 0, Scale::linear,
                sampling_interval, to_ll),
};

#undef CALIB_VALUE_GROUP
#undef CALIB_FIELD

}  // namespace

std::span<const ParamInfo> all_params() { return kParams; }

const ParamInfo* find_param(std::string_view name) {
  for (const auto& p : kParams) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ParamInfo& param_info(std::string_view name) {
  const auto* p = find_param(name);
  if (p == nullptr) throw ConfigError("unknown parameter", std::string(name));
  return *p;
}

double get_param(const SimConfig& config, std::string_view name) {
  return param_info(name).get(config);
}

void set_param(SimConfig& config, std::string_view name, double value) {
  param_info(name).set(config, value);
}

ParamSpec default_param_spec(std::string_view name) {
  const auto& info = param_info(name);
  if (!info.calibratable) throw ConfigError("parameter is not calibratable", std::string(name));
  const bool integer = info.kind == ParamKind::count || info.kind == ParamKind::size ||
                       info.kind == ParamKind::price;
  return ParamSpec{std::string(name), info.range_lo, info.range_hi, info.scale, integer};
}

ThetaSpace::ThetaSpace(std::vector<ParamSpec> params) : params_(std::move(params)) {
  for (const auto& p : params_) {
    param_info(p.name);
    if (!(p.lower < p.upper)) throw ConfigError("empty range", p.name);
    if (p.scale == Scale::log && p.lower <= 0.0) {
      throw ConfigError("log-scaled range must be positive", p.name);
    }
  }
}

std::vector<std::string> ThetaSpace::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

std::size_t ThetaSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw ConfigError("parameter is not part of the search space", std::string(name));
}

std::vector<double> ThetaSpace::to_unit(std::span<const double> theta) const {
  std::vector<double> u(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& p = params_[i];
    if (p.scale == Scale::log) {
      u[i] = (std::log(theta[i]) - std::log(p.lower)) / (std::log(p.upper) - std::log(p.lower));
    } else {
      u[i] = (theta[i] - p.lower) / (p.upper - p.lower);
    }
  }
  return u;
}

std::vector<double> ThetaSpace::from_unit(std::span<const double> unit) const {
  std::vector<double> theta(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& p = params_[i];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    double v = p.scale == Scale::log
                   ? std::exp(std::log(p.lower) + u * (std::log(p.upper) - std::log(p.lower)))
                   : p.lower + u * (p.upper - p.lower);
    if (p.integer) v = std::round(v);
    theta[i] = std::clamp(v, p.lower, p.upper);
  }
  return theta;
}

bool ThetaSpace::contains(std::span<const double> theta) const {
  if (theta.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double tol = 1e-12 * std::max(std::fabs(params_[i].lower), std::fabs(params_[i].upper));
    if (!(theta[i] >= params_[i].lower - tol && theta[i] <= params_[i].upper + tol)) return false;
  }
  return true;
}

SimConfig ThetaSpace::apply(SimConfig base, std::span<const double> theta) const {
  for (std::size_t i = 0; i < dim(); ++i) set_param(base, params_[i].name, theta[i]);
  return base;
}

std::vector<double> ThetaSpace::extract(const SimConfig& config) const {
  std::vector<double> theta(dim());
  for (std::size_t i = 0; i < dim(); ++i) theta[i] = get_param(config, params_[i].name);
  return theta;
}

}  // namespace calib
