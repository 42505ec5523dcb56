#pragma once

#include <cstddef>

namespace calib {

struct TrustRegionParams {
  double length_init = 0.8;
  double length_min = 1.0 / 128.0;
  double length_max = 1.6;
  std::size_t tau_succ = 1;
  std::size_t tau_fail = 1;  // conventionally the problem dimension
};

// Side-length controller of a single trust region. A success expands the
// region after tau_succ consecutive improvements; tau_fail consecutive
// failures halve it. Falling below length_min flags a restart.
class TrustRegion {
 public:
  enum class Event { none, expanded, shrunk, restart };

  explicit TrustRegion(const TrustRegionParams& params);

  Event record(bool improved);
  void restart();

  double length() const noexcept { return length_; }
  std::size_t successes() const noexcept { return successes_; }
  std::size_t failures() const noexcept { return failures_; }
  bool needs_restart() const noexcept { return needs_restart_; }
  const TrustRegionParams& params() const noexcept { return params_; }

 private:
  TrustRegionParams params_;
  double length_;
  std::size_t successes_ = 0;
  std::size_t failures_ = 0;
  bool needs_restart_ = false;
};

}  // namespace calib
