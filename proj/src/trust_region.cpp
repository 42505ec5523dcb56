#include "calib/trust_region.hpp"

#include <algorithm>
#include <stdexcept>

namespace calib {

TrustRegion::TrustRegion(const TrustRegionParams& params) : params_(params), length_(params.length_init) {
  if (!(params.length_min > 0.0 && params.length_min <= params.length_init &&
        params.length_init <= params.length_max)) {
    throw std::invalid_argument("trust region needs 0 < L_min <= L_init <= L_max");
  }
  if (params.tau_succ == 0 || params.tau_fail == 0) {
    throw std::invalid_argument("trust region thresholds must be >= 1");
  }
}

TrustRegion::Event TrustRegion::record(bool improved) {
  if (needs_restart_) throw std::logic_error("trust region must be restarted first");
  if (improved) {
    ++successes_;
    failures_ = 0;
  } else {
    ++failures_;
    successes_ = 0;
  }
  if (successes_ >= params_.tau_succ) {
    length_ = std::min(2.0 * length_, params_.length_max);
    successes_ = failures_ = 0;
    return Event::expanded;
  }
  if (failures_ >= params_.tau_fail) {
    length_ *= 0.5;
    successes_ = failures_ = 0;
    if (length_ < params_.length_min) {
      needs_restart_ = true;
      return Event::restart;
    }
    return Event::shrunk;
  }
  return Event::none;
}

void TrustRegion::restart() {
  length_ = params_.length_init;
  successes_ = failures_ = 0;
  needs_restart_ = false;
}

}  // namespace calib
