#pragma once

#include <deque>
#include <stdexcept>

namespace lazydual {

// O(D)-memory bookkeeping for one worker's lazy condition. acc_A and
// acc_B track the geometric sums over iterate-movement history
//   acc_A = sum_{j=0}^{k-1}   c^{k-j}   delta_j
//   acc_B = sum_{j=0}^{k-D-1} c^{k-D-j} delta_j
// and the window holds the last D deltas. delta_j with j < 0 is zero.
class LazyAccumulators {
 public:
  LazyAccumulators() = default;
  LazyAccumulators(double c, double gamma, int D, double mu_min)
      : c_(c), gamma_(gamma), D_(D), mu_min_(mu_min) {
    if (D < 1) throw std::invalid_argument("delay cap must be >= 1");
  }

  // Advance one iteration with delta_{k-1} = ||x_i^{k-1} - x_i^k||^2 and
  // return the lazy-condition right-hand side for iteration k.
  double update(double delta) {
    if (delta < 0.0) throw std::invalid_argument("negative squared delta");
    acc_A_ = c_ * (acc_A_ + delta);
    const double evicted =
        static_cast<int>(window_.size()) == D_ ? window_.front() : 0.0;
    acc_B_ = c_ * (acc_B_ + evicted);
    window_.push_back(delta);
    if (static_cast<int>(window_.size()) > D_) window_.pop_front();
    window_sum_ = 0.0;
    for (double v : window_) window_sum_ += v;
    return rhs();
  }

  double rhs() const {
    return (3.0 / (mu_min_ * mu_min_)) *
           (acc_B_ + acc_A_ + (c_ + gamma_) * window_sum_);
  }

  double acc_A() const { return acc_A_; }
  double acc_B() const { return acc_B_; }
  double window_sum() const { return window_sum_; }

 private:
  double c_ = 0.0;
  double gamma_ = 0.0;
  int D_ = 1;
  double mu_min_ = 1.0;
  double acc_A_ = 0.0;
  double acc_B_ = 0.0;
  double window_sum_ = 0.0;
  std::deque<double> window_;
};

// true = the cached gradient may be reused (skip the send).
inline bool lazy_check(double lhs_sq, double rhs, int delay, int D) {
  return lhs_sq <= rhs && delay < D;
}

}  // namespace lazydual
