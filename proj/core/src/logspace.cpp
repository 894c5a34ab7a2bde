#include "treecrf/detail/logspace.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

namespace treecrf::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
#define TREECRF_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define TREECRF_CLONES
#endif

// exp(x) in place for x <= 0, written so the loop auto-vectorizes.
// Cody-Waite reduction to |r| <= ln2/2, then a degree 12 Taylor
// polynomial; about 2 ulp. Inputs below -708 (including -inf) give 0.
TREECRF_CLONES void exp_nonpositive(double* x, std::size_t k) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kRound = 0x1.8p52;
  for (std::size_t a = 0; a < k; ++a) {
    const double in = x[a];
    const bool under = in < -708.0;
    const double v = under ? -708.0 : in;
    const double t = v * kLog2e + kRound;
    const double n = t - kRound;
    const double r = (v - n * kLn2Hi) - n * kLn2Lo;
    double p = 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // The low mantissa bits of t hold n; move them into the exponent.
    std::uint64_t bits;
    std::memcpy(&bits, &t, sizeof bits);
    bits = (bits + 1023) << 52;
    double scale;
    std::memcpy(&scale, &bits, sizeof scale);
    x[a] = under ? 0.0 : p * scale;
  }
}

}  // namespace

double log_sum_exp(const double* t, int k) {
  double m = -kInf;
  for (int a = 0; a < k; ++a) m = t[a] > m ? t[a] : m;
  if (m == -kInf) return m;
  double sum = 0.0;
  for (int a = 0; a < k; ++a) sum += std::exp(t[a] - m);
  return m + std::log(sum);
}

void SplitRows::reduce() {
  const std::size_t rows = ends_.size();
  out_.resize(rows);
  max_.resize(rows);
  std::size_t start = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double m = -kInf;
    for (std::size_t a = start; a < ends_[r]; ++a) m = terms_[a] > m ? terms_[a] : m;
    // An all -inf row stays -inf and exponentiates to zeros.
    const double shift = m == -kInf ? 0.0 : m;
    for (std::size_t a = start; a < ends_[r]; ++a) terms_[a] -= shift;
    max_[r] = m;
    start = ends_[r];
  }
  exp_nonpositive(terms_.data(), size_);
  start = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t a = start; a < ends_[r]; ++a) sum += terms_[a];
    out_[r] = max_[r] == -kInf ? -kInf : max_[r] + std::log(sum);
    start = ends_[r];
  }
  next_ = 0;
}

}  // namespace treecrf::detail
