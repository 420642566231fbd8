#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wavedecay/error.hpp"

namespace wavedecay {

/// True when consecutive spacings agree to a relative tolerance.
inline bool is_uniform_grid(std::span<const double> t, double rel_tol = 1e-9) {
  if (t.size() < 2) return true;
  const double h = t[1] - t[0];
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    if (std::abs((t[k + 1] - t[k]) - h) > rel_tol * std::abs(h)) return false;
  }
  return true;
}

/// Running integral t -> int_{t_0}^{t} q(s) ds of sampled data q.
///
/// On uniform grids q is replaced by its composite-Simpson interpolant: the
/// quadratic through each node pair [t_{2j}, t_{2j+2}], plus the quadratic
/// through the last three nodes when the interval count is odd. The running
/// integral of that interpolant agrees with composite Simpson at even nodes,
/// is fourth-order everywhere and continuous in t. Non-uniform grids use the
/// piecewise-linear interpolant (trapezoid rule).
///
/// Integration stops at `end_time`, which lies in [t_end, t_{end+1}); the
/// last cell's interpolant is extended up to it. For t beyond end_time the
/// integral is held constant, which is how compactly supported integrands
/// are represented.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  CumulativeIntegral(std::span<const double> times, std::span<const double> values,
                     std::size_t end, double end_time, bool uniform)
      : times_(times.begin(), times.end()),
        values_(values.begin(), values.end()),
        prefix_(times.size(), 0.0),
        end_(end),
        end_time_(end_time),
        uniform_(uniform) {
    detail::require(times.size() == values.size(), "integral: times/values length mismatch");
    detail::require(times.size() >= 2, "integral: need at least two samples");
    detail::require(end < times.size(), "integral: end index out of range");
    detail::require(end_time >= times_[end] && (end + 1 == times.size() || end_time < times_[end + 1]),
                    "integral: end time must lie in the cell after the end node");
    for (std::size_t k = 0; k < end_; ++k) prefix_[k + 1] = prefix_[k] + partial(k, times_[k + 1]);
    total_ = end_time_ > times_[end_] ? tail_piece(end_time_) : prefix_[end_];
    for (std::size_t k = end_ + 1; k < prefix_.size(); ++k) prefix_[k] = total_;
  }

  CumulativeIntegral(std::span<const double> times, std::span<const double> values)
      : CumulativeIntegral(times, values, times.size() - 1, times.back(), is_uniform_grid(times)) {}

  /// Integral up to node k.
  double at_node(std::size_t k) const { return prefix_[k]; }
  const std::vector<double>& node_values() const { return prefix_; }

  /// Integral over the whole integration range [t_0, end_time].
  double total() const { return total_; }

  /// Integral up to an arbitrary t >= t_0; constant past end_time.
  double at(double t) const {
    if (t >= end_time_) return total_;
    if (t >= times_[end_]) return t == times_[end_] ? prefix_[end_] : tail_piece(t);
    if (t <= times_.front()) return 0.0;
    const std::size_t k = cell_of(t);
    if (t == times_[k]) return prefix_[k];
    return prefix_[k] + partial(k, t);
  }

  std::size_t end_index() const { return end_; }

 private:
  // Index k with t_k <= t < t_{k+1}, assuming t inside [t_0, t_end).
  std::size_t cell_of(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(end_) + 1, t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, end_ - 1);
  }

  // Integral up to t in (t_end, end_time], extrapolating the last cell's
  // interpolant; with a single node in range, the first cell's is used.
  double tail_piece(double t) const {
    if (end_ == 0) return partial(0, t);
    return prefix_[end_ - 1] + partial(end_ - 1, t);
  }

  // int_{t_k}^{t} of the interpolant on cell k.
  double partial(std::size_t k, double t) const {
    const double h = times_[k + 1] - times_[k];
    if (!uniform_ || end_ < 2) {
      const double x = t - times_[k];
      return x * values_[k] + 0.5 * x * x / h * (values_[k + 1] - values_[k]);
    }
    // Stencil start p and local coordinate of t_k within it.
    std::size_t p = k;
    double s0 = 0.0;
    if (k % 2 == 1 || k + 2 > end_) {
      p = k - 1;
      s0 = 1.0;
    }
    const double s1 = s0 + (t - times_[k]) / h;
    auto F0 = [](double s) { return 0.5 * (s * s * s / 3.0 - 1.5 * s * s + 2.0 * s); };
    auto F1 = [](double s) { return -(s * s * s / 3.0 - s * s); };
    auto F2 = [](double s) { return 0.5 * (s * s * s / 3.0 - 0.5 * s * s); };
    return h * (values_[p] * (F0(s1) - F0(s0)) + values_[p + 1] * (F1(s1) - F1(s0)) +
                values_[p + 2] * (F2(s1) - F2(s0)));
  }

  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> prefix_;
  std::size_t end_ = 0;
  double end_time_ = 0.0;
  double total_ = 0.0;
  bool uniform_ = true;
};

/// Composite Simpson (uniform) or trapezoid (non-uniform) integral of samples.
inline double integrate(std::span<const double> times, std::span<const double> values) {
  return CumulativeIntegral(times, values).total();
}

}  // namespace wavedecay
