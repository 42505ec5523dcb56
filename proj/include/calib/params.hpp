#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calib/simulator.hpp"

namespace calib {

enum class Scale { linear, log };

std::string_view to_string(Scale s) noexcept;
Scale parse_scale(std::string_view text);

enum class ParamKind { count, rate, size, price, real, clock, duration };

// A simulator knob addressable by name. Names for calibrated quantities match
// the conventional symbol list (num_value_1, lambda_a_1, ..., fund_vol).
struct ParamInfo {
  std::string_view name;
  ParamKind kind;
  bool calibratable;
  double range_lo;  // default search range, meaningful when calibratable
  double range_hi;
  Scale scale;
  double (*get)(const SimConfig&);
  void (*set)(SimConfig&, double);
};

std::span<const ParamInfo> all_params();
const ParamInfo* find_param(std::string_view name);
const ParamInfo& param_info(std::string_view name);  // throws ConfigError

double get_param(const SimConfig& config, std::string_view name);
void set_param(SimConfig& config, std::string_view name, double value);

struct ParamSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
  bool integer = false;
};

ParamSpec default_param_spec(std::string_view name);

// Box-bounded parameter space with a per-dimension scale. Optimizers work in
// the unit cube; log-scaled dimensions are uniform in log space there.
class ThetaSpace {
 public:
  ThetaSpace() = default;
  explicit ThetaSpace(std::vector<ParamSpec> params);

  std::size_t dim() const noexcept { return params_.size(); }
  const ParamSpec& operator[](std::size_t i) const { return params_[i]; }
  const std::vector<ParamSpec>& params() const noexcept { return params_; }
  std::vector<std::string> names() const;
  std::size_t index_of(std::string_view name) const;  // throws ConfigError

  std::vector<double> to_unit(std::span<const double> theta) const;
  // Clamps to [0,1], maps back, rounds integer dimensions.
  std::vector<double> from_unit(std::span<const double> unit) const;
  bool contains(std::span<const double> theta) const;

  SimConfig apply(SimConfig base, std::span<const double> theta) const;
  std::vector<double> extract(const SimConfig& config) const;

 private:
  std::vector<ParamSpec> params_;
};

}  // namespace calib
