#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wavedecay/error.hpp"
#include "wavedecay/quadrature.hpp"

namespace wavedecay {

/// Forcing vanishes identically for t > support_end.
struct CompactSupport {
  double support_end = 0.0;
};

/// |f(t)| <= scale * exp(-rate * t) for all t >= 0.
struct ExponentialEnvelope {
  double scale = 0.0;
  double rate = 1.0;
};

/// No tail information: integrals are cut at the last sample.
struct TruncateAtEnd {};

/// How the improper integrals over [0, inf) are closed beyond the sampled window.
struct TailPolicy {
  std::variant<CompactSupport, ExponentialEnvelope, TruncateAtEnd> kind = TruncateAtEnd{};
  double tolerance = 1e-8;

  static TailPolicy compact(double support_end, double tol = 1e-8) { return {CompactSupport{support_end}, tol}; }
  static TailPolicy exponential(double scale, double rate, double tol = 1e-8) {
    return {ExponentialEnvelope{scale, rate}, tol};
  }
  static TailPolicy truncate(double tol = 1e-8) { return {TruncateAtEnd{}, tol}; }

  bool is_compact() const { return std::holds_alternative<CompactSupport>(kind); }
  bool is_truncated() const { return std::holds_alternative<TruncateAtEnd>(kind); }

  std::string name() const {
    if (is_compact()) return "compact_support";
    if (is_truncated()) return "truncate_at_end";
    return "exponential_envelope";
  }
};

/// Scalar forcing f(t) sampled on a strictly increasing grid starting at 0.
class SampledSignal {
 public:
  SampledSignal(std::vector<double> times, std::vector<double> values, TailPolicy tail = {})
      : times_(std::move(times)), values_(std::move(values)), tail_(tail) {
    detail::require(times_.size() >= 2, "signal: need at least two samples");
    detail::require(times_.size() == values_.size(), "signal: times/values length mismatch");
    detail::require(times_.front() == 0.0, "signal: time grid must start at 0");
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
      detail::require(times_[k + 1] > times_[k], "signal: time grid not strictly increasing");
    }
    for (double v : values_) detail::require(std::isfinite(v), "signal: non-finite sample");
    detail::require(tail_.tolerance >= 0.0, "signal: negative tail tolerance");
    uniform_ = is_uniform_grid(times_);

    end_ = times_.size() - 1;
    if (const auto* cs = std::get_if<CompactSupport>(&tail_.kind)) {
      detail::require(cs->support_end >= 0.0 && cs->support_end <= times_.back(),
                      "signal: compact support end outside the sampled window");
      const double cut = cs->support_end + 1e-12 * std::max(1.0, cs->support_end);
      end_ = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), cut) - times_.begin()) - 1;
      for (std::size_t k = end_ + 1; k < values_.size(); ++k) {
        detail::require(values_[k] == 0.0, "signal: nonzero sample beyond declared compact support");
      }
    } else if (const auto* env = std::get_if<ExponentialEnvelope>(&tail_.kind)) {
      detail::require(env->scale >= 0.0 && env->rate > 0.0, "signal: exponential envelope needs C >= 0, alpha > 0");
    }
  }

  /// Uniform grid 0, dt, ..., n*dt with values f(t_k).
  template <class F>
  static SampledSignal from_function(F&& f, double dt, std::size_t intervals, TailPolicy tail = {}) {
    std::vector<double> t(intervals + 1), v(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
      t[k] = static_cast<double>(k) * dt;
      v[k] = f(t[k]);
    }
    return SampledSignal(std::move(t), std::move(v), tail);
  }

  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }
  const TailPolicy& tail() const { return tail_; }
  bool uniform() const { return uniform_; }
  double end_time() const { return times_.back(); }

  /// Last node included in the integration range (the last node not past
  /// the support end for compactly supported signals, otherwise the last sample).
  std::size_t integration_end() const { return end_; }

  /// Upper limit of the integration range: the support end or the last sample.
  double integration_end_time() const {
    if (const auto* cs = std::get_if<CompactSupport>(&tail_.kind)) {
      return std::max(cs->support_end, times_[end_]);
    }
    return times_.back();
  }

  /// Running integral of w(t_k) * f(t_k) over the integration range.
  template <class Weight>
  CumulativeIntegral weighted_integral(Weight&& w) const {
    std::vector<double> q(values_.size());
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = w(times_[k]) * values_[k];
    return CumulativeIntegral(times_, q, end_, integration_end_time(), uniform_);
  }

  /// Linear interpolation inside the window; zero past a compact support.
  double value_at(double t) const {
    if (tail_.is_compact() && t > integration_end_time()) return 0.0;
    detail::require(t >= 0.0 && t <= times_.back(), "signal: evaluation outside sampled window");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    if (k >= times_.size()) return values_.back();
    k = k == 0 ? 0 : k - 1;
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - w) * values_[k] + w * values_[k + 1];
  }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  TailPolicy tail_;
  bool uniform_ = true;
  std::size_t end_ = 0;
};

}  // namespace wavedecay
