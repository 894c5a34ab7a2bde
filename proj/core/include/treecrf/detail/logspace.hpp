#pragma once

#include <cstddef>
#include <vector>

namespace treecrf::detail {

// log(sum_k exp(t[k])) with max subtraction. Returns -inf when every term
// is -inf (or k == 0).
double log_sum_exp(const double* t, int k);

// A ragged batch of log-sum-exp rows, reduced in one vectorized pass.
// Rows are filled through add(), reduced, then read back in order.
class SplitRows {
 public:
  void clear() {
    size_ = 0;
    ends_.clear();
    next_ = 0;
  }

  // Appends a row of k terms; the pointer stays valid until the next add().
  double* add(int k) {
    const std::size_t at = size_;
    size_ += k;
    if (size_ > terms_.size()) terms_.resize(2 * size_);
    ends_.push_back(size_);
    return terms_.data() + at;
  }

  void reduce();

  double next() { return out_[next_++]; }

 private:
  std::vector<double> terms_;  // grows, never shrinks
  std::size_t size_ = 0;
  std::vector<std::size_t> ends_;
  std::vector<double> out_;
  std::vector<double> max_;
  std::size_t next_ = 0;
};

}  // namespace treecrf::detail
