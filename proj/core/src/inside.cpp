#include "treecrf/inside.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "treecrf/detail/logspace.hpp"

namespace treecrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lengths(std::span<const ArcScores> arcs,
                   std::span<const SibScores> sibs) {
  if (arcs.empty()) throw std::invalid_argument("inside: empty batch");
  if (!sibs.empty() && sibs.size() != arcs.size()) {
    throw std::invalid_argument("inside: arc and sibling batch sizes differ");
  }
  for (std::size_t b = 0; b < arcs.size(); ++b) {
    if (arcs[b].n() < 1) {
      throw std::invalid_argument("inside: sentence with no words");
    }
    arcs[b].check_finite();
    if (!sibs.empty()) {
      if (sibs[b].n() != arcs[b].n()) {
        throw std::invalid_argument(
            "inside: arc and sibling score dimensions differ");
      }
      sibs[b].check_finite();
    }
  }
}

}  // namespace

ChartSet::ChartSet(std::vector<int> lengths, bool second_order)
    : lengths_(std::move(lengths)), second_order_(second_order) {
  max_len_ = lengths_.empty()
                 ? 0
                 : *std::max_element(lengths_.begin(), lengths_.end());
  const std::size_t cells =
      lengths_.size() * static_cast<std::size_t>(stride()) * stride();
  inc_.assign(cells, -kInf);
  inner_.assign(cells, -kInf);
  comp_.assign(cells, -kInf);
  compT_.assign(cells, -kInf);
  if (second_order_) sib_.assign(cells, -kInf);
  for (int b = 0; b < batch_size(); ++b) {
    for (int i = 0; i <= lengths_[b]; ++i) {
      comp_[index(b, i, i)] = 0.0;
      compT_[index(b, i, i)] = 0.0;
    }
  }
}

ArcScores Marginals::arc_matrix() const {
  ArcScores out(n);
  for (int i = 0; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i != j) out.at(i, j) = arc_at(i, j);
    }
  }
  return out;
}

// Runs the width-synchronous inside pass over a batch and, on request, the
// reverse accumulation of adjoints through the same recurrences.
class InsideKernel {
 public:
  InsideKernel(std::span<const ArcScores> arcs, std::span<const SibScores> sibs,
               RootPolicy root)
      : charts_(lengths_of(arcs), !sibs.empty()),
        lo_(root == RootPolicy::kSingle ? 1 : 0),
        root_(root) {
    const int B = charts_.batch_size();
    const std::size_t s = charts_.stride();
    arc_.assign(B * s * s, -kInf);
    for (int b = 0; b < B; ++b) {
      const ArcScores& a = arcs[b];
      for (int i = 0; i <= a.n(); ++i) {
        for (int j = 1; j <= a.n(); ++j) {
          if (i == j) continue;
          const double v = a(i, j);
          arc_[charts_.index(b, i, j)] = is_neg_inf(v) ? -kInf : v;
        }
      }
    }
    if (charts_.second_order()) {
      // Repacked as [b][head][mod][sib] so split loops read contiguously.
      sib_.assign(B * s * s * s, 0.0);
      for (int b = 0; b < B; ++b) {
        const SibScores& t = sibs[b];
        const int n = t.n();
        for (int h = 0; h <= n; ++h) {
          for (int m = 1; m <= n; ++m) {
            const int lo = std::min(h, m) + 1, hi = std::max(h, m);
            for (int k = lo; k < hi; ++k) {
              sib_[sib_index(b, h, m, k)] = t(h, k, m);
            }
          }
        }
      }
    }
    buf_.resize(s + 1);
  }

  void forward() {
    const int B = charts_.batch_size();
    log_z_.assign(B, -kInf);
    for (int w = 1; w <= charts_.max_length(); ++w) {
      // Items of one width only read narrower items (and, for C, I of the
      // same width), so each phase reduces all of its rows at once.
      rows_.clear();
      for_width(w, [&](int b, int i, int j) {
        if (charts_.second_order()) {
          incomplete2(b, i, j);
          if (i >= 1) sibling(b, i, j);
        } else {
          incomplete1(b, i, j);
        }
      });
      rows_.reduce();
      for_width(w, [&](int b, int i, int j) {
        if (charts_.second_order()) {
          store_incomplete2(b, i, j);
          if (i >= 1) store_sibling(b, i, j);
        } else {
          store_incomplete1(b, i, j);
        }
      });
      rows_.clear();
      for_width(w, [&](int b, int i, int j) { complete(b, i, j); });
      rows_.reduce();
      for_width(w, [&](int b, int i, int j) { store_complete(b, i, j); });
    }
    for (int b = 0; b < B; ++b) log_z_[b] = root_value(b);
  }

  // Accumulates d(sum_b upstream[b] * logZ_b) into arc_grad_/sib_grad_.
  void backward(std::span<const double> upstream) {
    const int B = charts_.batch_size();
    const std::size_t s = charts_.stride();
    d_inc_.assign(arc_.size(), 0.0);
    d_comp_.assign(arc_.size(), 0.0);
    d_arc_.assign(arc_.size(), 0.0);
    if (charts_.second_order()) {
      d_sib_span_.assign(arc_.size(), 0.0);
      d_sib_.assign(B * s * s * s, 0.0);
    }
    for (int b = 0; b < B; ++b) root_backward(b, upstream[b]);
    for (int w = charts_.max_length(); w >= 1; --w) {
      for (int b = 0; b < B; ++b) {
        const int n = charts_.lengths_[b];
        for (int i = lo_; i + w <= n; ++i) {
          const int j = i + w;
          complete_backward(b, i, j);
          if (charts_.second_order()) {
            if (i >= 1) sibling_backward(b, i, j);
            incomplete2_backward(b, i, j);
          } else {
            incomplete1_backward(b, i, j);
          }
        }
      }
    }
  }

  const std::vector<double>& log_partition() const { return log_z_; }
  ChartSet& charts() { return charts_; }

  Marginals marginals(int b) const {
    const int n = charts_.lengths_[b];
    Marginals out;
    out.n = n;
    out.arc.assign((n + 1) * (n + 1), 0.0);
    for (int i = 0; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j) out.arc[i * (n + 1) + j] = d_arc_[charts_.index(b, i, j)];
      }
    }
    if (charts_.second_order()) {
      out.sib.assign(static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1), 0.0);
      for (int h = 0; h <= n; ++h) {
        for (int m = 1; m <= n; ++m) {
          const int lo = std::min(h, m) + 1, hi = std::max(h, m);
          for (int k = lo; k < hi; ++k) {
            out.sib[(h * (n + 1) + k) * (n + 1) + m] =
                d_sib_[sib_index(b, h, m, k)];
          }
        }
      }
    }
    return out;
  }

 private:
  static std::vector<int> lengths_of(std::span<const ArcScores> arcs) {
    std::vector<int> out;
    out.reserve(arcs.size());
    for (const auto& a : arcs) out.push_back(a.n());
    return out;
  }

  std::size_t sib_index(int b, int h, int m, int k) const {
    const std::size_t s = charts_.stride();
    return ((b * s + h) * s + m) * s + k;
  }

  const double* row(const std::vector<double>& t, int b, int i) const {
    return t.data() + charts_.index(b, i, 0);
  }
  double* row(std::vector<double>& t, int b, int i) {
    return t.data() + charts_.index(b, i, 0);
  }

  template <class F>
  void for_width(int w, F&& f) {
    for (int b = 0; b < charts_.batch_size(); ++b) {
      const int n = charts_.lengths_[b];
      for (int i = lo_; i + w <= n; ++i) f(b, i, i + w);
    }
  }

  // I(i,j) and I(j,i) share their split sum in the first-order model:
  //   I(i,j) = s(i,j) + logsum_{i<=r<j} exp(C(i,r) + C(j,r+1)).
  void incomplete1(int b, int i, int j) {
    const double* ci = row(charts_.comp_, b, i);
    const double* cj = row(charts_.comp_, b, j);
    double* t = rows_.add(j - i);
    for (int r = i; r < j; ++r) *t++ = ci[r] + cj[r + 1];
  }

  void store_incomplete1(int b, int i, int j) {
    const double inner = rows_.next();
    const std::size_t ij = charts_.index(b, i, j), ji = charts_.index(b, j, i);
    charts_.inner_[ij] = inner;
    charts_.inc_[ij] = arc_[ij] + inner;
    if (i >= 1) {
      charts_.inner_[ji] = inner;
      charts_.inc_[ji] = arc_[ji] + inner;
    }
  }

  // Rightward:
  //   I(i,j) = s(i,j) + log[ exp(C(j,i+1))
  //            + sum_{i<r<j} exp(I(i,r) + S(r,j) + s(i,r,j)) ]
  // and its mirror image for the leftward item headed at j.
  void incomplete2(int b, int i, int j) {
    const double* ii = row(charts_.inc_, b, i);
    const double* sj = row(charts_.sib_, b, j);
    const double* tr = &sib_[sib_index(b, i, j, 0)];
    double* t = rows_.add(j - i);
    *t++ = charts_.comp_[charts_.index(b, j, i + 1)];
    for (int r = i + 1; r < j; ++r) *t++ = ii[r] + sj[r] + tr[r];
    if (i == 0) return;

    const double* ij = row(charts_.inc_, b, j);
    const double* si = row(charts_.sib_, b, i);
    const double* tl = &sib_[sib_index(b, j, i, 0)];
    t = rows_.add(j - i);
    *t++ = charts_.comp_[charts_.index(b, i, j - 1)];
    for (int r = i + 1; r < j; ++r) *t++ = ij[r] + si[r] + tl[r];
  }

  void store_incomplete2(int b, int i, int j) {
    std::size_t cell = charts_.index(b, i, j);
    charts_.inner_[cell] = rows_.next();
    charts_.inc_[cell] = arc_[cell] + charts_.inner_[cell];
    if (i == 0) return;
    cell = charts_.index(b, j, i);
    charts_.inner_[cell] = rows_.next();
    charts_.inc_[cell] = arc_[cell] + charts_.inner_[cell];
  }

  // S(i,j) = logsum_{i<=r<j} exp(C(i,r) + C(j,r+1)), stored symmetrically.
  void sibling(int b, int i, int j) {
    const double* ci = row(charts_.comp_, b, i);
    const double* cj = row(charts_.comp_, b, j);
    double* t = rows_.add(j - i);
    for (int r = i; r < j; ++r) *t++ = ci[r] + cj[r + 1];
  }

  void store_sibling(int b, int i, int j) {
    const double v = rows_.next();
    charts_.sib_[charts_.index(b, i, j)] = v;
    charts_.sib_[charts_.index(b, j, i)] = v;
  }

  // C(i,j) = logsum_{i<r<=j} exp(I(i,r) + C(r,j)), and leftward
  // C(j,i) = logsum_{i<=r<j} exp(I(j,r) + C(r,i)).
  void complete(int b, int i, int j) {
    const double* ii = row(charts_.inc_, b, i);
    const double* ctj = row(charts_.compT_, b, j);
    double* t = rows_.add(j - i);
    for (int r = i + 1; r <= j; ++r) *t++ = ii[r] + ctj[r];
    if (i == 0) return;

    const double* ij = row(charts_.inc_, b, j);
    const double* cti = row(charts_.compT_, b, i);
    t = rows_.add(j - i);
    for (int r = i; r < j; ++r) *t++ = ij[r] + cti[r];
  }

  void store_complete(int b, int i, int j) {
    double v = rows_.next();
    charts_.comp_[charts_.index(b, i, j)] = v;
    charts_.compT_[charts_.index(b, j, i)] = v;
    if (i == 0) return;
    v = rows_.next();
    charts_.comp_[charts_.index(b, j, i)] = v;
    charts_.compT_[charts_.index(b, i, j)] = v;
  }
  double root_value(int b) {
    const int n = charts_.lengths_[b];
    if (root_ == RootPolicy::kMulti) {
      return charts_.comp_[charts_.index(b, 0, n)];
    }
    int k = 0;
    for (int r = 1; r <= n; ++r) {
      buf_[k++] = arc_[charts_.index(b, 0, r)] +
                  charts_.comp_[charts_.index(b, r, 1)] +
                  charts_.comp_[charts_.index(b, r, n)];
    }
    return detail::log_sum_exp(buf_.data(), k);
  }

  void root_backward(int b, double g) {
    const int n = charts_.lengths_[b];
    if (g == 0.0 || log_z_[b] == -kInf) return;
    if (root_ == RootPolicy::kMulti) {
      d_comp_[charts_.index(b, 0, n)] += g;
      return;
    }
    for (int r = 1; r <= n; ++r) {
      const std::size_t a = charts_.index(b, 0, r);
      const std::size_t left = charts_.index(b, r, 1);
      const std::size_t right = charts_.index(b, r, n);
      const double wt =
          g * std::exp(arc_[a] + charts_.comp_[left] + charts_.comp_[right] -
                       log_z_[b]);
      d_arc_[a] += wt;
      d_comp_[left] += wt;
      d_comp_[right] += wt;
    }
  }

  // The adjoint of y = logsumexp(t_1..t_K) with respect to t_k is
  // exp(t_k - y); every backward step below scatters g * exp(t_k - y) onto
  // the operands of term k.

  void complete_backward(int b, int i, int j) {
    std::size_t cell = charts_.index(b, i, j);
    double g = d_comp_[cell];
    double y = charts_.comp_[cell];
    if (g != 0.0 && y != -kInf) {
      const double* ii = row(charts_.inc_, b, i);
      const double* ctj = row(charts_.compT_, b, j);
      double* dii = row(d_inc_, b, i);
      for (int r = i + 1; r <= j; ++r) {
        const double wt = g * std::exp(ii[r] + ctj[r] - y);
        dii[r] += wt;
        d_comp_[charts_.index(b, r, j)] += wt;
      }
    }
    if (i == 0) return;
    cell = charts_.index(b, j, i);
    g = d_comp_[cell];
    y = charts_.comp_[cell];
    if (g == 0.0 || y == -kInf) return;
    const double* ij = row(charts_.inc_, b, j);
    const double* cti = row(charts_.compT_, b, i);
    double* dij = row(d_inc_, b, j);
    for (int r = i; r < j; ++r) {
      const double wt = g * std::exp(ij[r] + cti[r] - y);
      dij[r] += wt;
      d_comp_[charts_.index(b, r, i)] += wt;
    }
  }

  // Scatter for the split sum shared by first-order I and by S.
  void split_backward(int b, int i, int j, double g, double y) {
    if (g == 0.0 || y == -kInf) return;
    const double* ci = row(charts_.comp_, b, i);
    const double* cj = row(charts_.comp_, b, j);
    double* dci = row(d_comp_, b, i);
    double* dcj = row(d_comp_, b, j);
    for (int r = i; r < j; ++r) {
      const double wt = g * std::exp(ci[r] + cj[r + 1] - y);
      dci[r] += wt;
      dcj[r + 1] += wt;
    }
  }

  void incomplete1_backward(int b, int i, int j) {
    const std::size_t ij = charts_.index(b, i, j), ji = charts_.index(b, j, i);
    const double g_right = d_inc_[ij];
    const double g_left = i >= 1 ? d_inc_[ji] : 0.0;
    d_arc_[ij] += g_right;
    if (i >= 1) d_arc_[ji] += g_left;
    split_backward(b, i, j, g_right + g_left, charts_.inner_[ij]);
  }

  void sibling_backward(int b, int i, int j) {
    const std::size_t cell = charts_.index(b, i, j);
    split_backward(b, i, j, d_sib_span_[cell], charts_.sib_[cell]);
  }

  void incomplete2_backward(int b, int i, int j) {
    std::size_t cell = charts_.index(b, i, j);
    double g = d_inc_[cell];
    double y = charts_.inner_[cell];
    d_arc_[cell] += g;
    if (g != 0.0 && y != -kInf) {
      const std::size_t first = charts_.index(b, j, i + 1);
      d_comp_[first] += g * std::exp(charts_.comp_[first] - y);
      const double* ii = row(charts_.inc_, b, i);
      const double* sj = row(charts_.sib_, b, j);
      const double* tr = &sib_[sib_index(b, i, j, 0)];
      double* dii = row(d_inc_, b, i);
      double* dtr = &d_sib_[sib_index(b, i, j, 0)];
      for (int r = i + 1; r < j; ++r) {
        const double wt = g * std::exp(ii[r] + sj[r] + tr[r] - y);
        dii[r] += wt;
        d_sib_span_[charts_.index(b, r, j)] += wt;
        dtr[r] += wt;
      }
    }
    if (i == 0) return;

    cell = charts_.index(b, j, i);
    g = d_inc_[cell];
    y = charts_.inner_[cell];
    d_arc_[cell] += g;
    if (g == 0.0 || y == -kInf) return;
    const std::size_t first = charts_.index(b, i, j - 1);
    d_comp_[first] += g * std::exp(charts_.comp_[first] - y);
    const double* ij = row(charts_.inc_, b, j);
    const double* si = row(charts_.sib_, b, i);
    const double* tl = &sib_[sib_index(b, j, i, 0)];
    double* dij = row(d_inc_, b, j);
    double* dsi = row(d_sib_span_, b, i);
    double* dtl = &d_sib_[sib_index(b, j, i, 0)];
    for (int r = i + 1; r < j; ++r) {
      const double wt = g * std::exp(ij[r] + si[r] + tl[r] - y);
      dij[r] += wt;
      dsi[r] += wt;
      dtl[r] += wt;
    }
  }

  ChartSet charts_;
  int lo_;
  RootPolicy root_;
  std::vector<double> arc_;
  std::vector<double> sib_;
  std::vector<double> buf_;
  detail::SplitRows rows_;
  std::vector<double> log_z_;

  std::vector<double> d_inc_;
  std::vector<double> d_comp_;
  std::vector<double> d_sib_span_;  // adjoints of S, canonical i<j cell
  std::vector<double> d_arc_;
  std::vector<double> d_sib_;
};

namespace {

double public_value(double v) { return v == -kInf ? kNegInf : v; }

InsideResult run_inside(std::span<const ArcScores> arcs,
                        std::span<const SibScores> sibs,
                        const InferenceOptions& opts) {
  check_lengths(arcs, sibs);
  InsideKernel kernel(arcs, sibs, opts.root);
  kernel.forward();
  InsideResult result;
  for (double v : kernel.log_partition()) {
    result.log_partition.push_back(public_value(v));
  }
  result.charts = std::move(kernel.charts());
  return result;
}

}  // namespace

InsideResult inside_first_order(std::span<const ArcScores> batch,
                                const InferenceOptions& opts) {
  return run_inside(batch, {}, opts);
}

InsideResult inside_second_order(std::span<const ArcScores> arcs,
                                 std::span<const SibScores> sibs,
                                 const InferenceOptions& opts) {
  if (sibs.size() != arcs.size()) {
    throw std::invalid_argument(
        "inside_second_order: one SibScores per sentence required");
  }
  return run_inside(arcs, sibs, opts);
}

ArcScores mask_arcs(const ArcScores& arcs, const PartialTree& partial) {
  if (partial.n() != arcs.n()) {
    throw std::invalid_argument("partial tree length does not match scores");
  }
  ArcScores masked = arcs;
  for (int j = 1; j <= partial.n(); ++j) {
    if (!partial.annotated(j)) continue;
    const int h = partial.head(j);
    if (h < 0 || h > partial.n() || h == j) {
      throw std::invalid_argument("partial tree head out of range");
    }
    for (int i = 0; i <= arcs.n(); ++i) {
      if (i != h && i != j) masked.at(i, j) = kNegInf;
    }
  }
  return masked;
}

namespace {

// check_finite rejects the mask sentinel, so masked scores go straight to
// the kernel after the unmasked input has been validated.
InsideKernel masked_kernel(const ArcScores& arcs, const SibScores* sibs,
                           const PartialTree& partial, RootPolicy root,
                           ArcScores& masked) {
  if (arcs.n() < 1) throw std::invalid_argument("inside: sentence with no words");
  arcs.check_finite();
  if (sibs != nullptr) {
    if (sibs->n() != arcs.n()) {
      throw std::invalid_argument(
          "inside: arc and sibling score dimensions differ");
    }
    sibs->check_finite();
  }
  masked = mask_arcs(arcs, partial);
  return InsideKernel(std::span<const ArcScores>(&masked, 1),
                      sibs != nullptr ? std::span<const SibScores>(sibs, 1)
                                      : std::span<const SibScores>(),
                      root);
}

}  // namespace

double constrained_inside(const ArcScores& arcs, const SibScores* sibs,
                          const PartialTree& partial,
                          const InferenceOptions& opts) {
  ArcScores masked;
  InsideKernel kernel = masked_kernel(arcs, sibs, partial, opts.root, masked);
  if (!partial.consistent()) return kNegInf;
  kernel.forward();
  return public_value(kernel.log_partition()[0]);
}

std::vector<Marginals> batch_marginals(std::span<const ArcScores> arcs,
                                       std::span<const SibScores> sibs,
                                       const InferenceOptions& opts,
                                       std::vector<double>* log_partition) {
  check_lengths(arcs, sibs);
  InsideKernel kernel(arcs, sibs, opts.root);
  kernel.forward();
  std::vector<double> ones(arcs.size(), 1.0);
  kernel.backward(ones);
  std::vector<Marginals> out;
  out.reserve(arcs.size());
  for (int b = 0; b < static_cast<int>(arcs.size()); ++b) {
    out.push_back(kernel.marginals(b));
  }
  if (log_partition != nullptr) {
    log_partition->clear();
    for (double v : kernel.log_partition()) {
      log_partition->push_back(public_value(v));
    }
  }
  return out;
}

Marginals marginals(const ArcScores& arcs, const SibScores* sibs,
                    const InferenceOptions& opts) {
  return batch_marginals(std::span<const ArcScores>(&arcs, 1),
                         sibs != nullptr ? std::span<const SibScores>(sibs, 1)
                                         : std::span<const SibScores>(),
                         opts)
      .front();
}

Marginals constrained_marginals(const ArcScores& arcs, const SibScores* sibs,
                                const PartialTree& partial,
                                const InferenceOptions& opts,
                                double* log_partition) {
  ArcScores masked;
  InsideKernel kernel = masked_kernel(arcs, sibs, partial, opts.root, masked);
  if (partial.consistent()) kernel.forward();
  if (!partial.consistent() || kernel.log_partition()[0] == -kInf) {
    throw std::domain_error(
        "partial annotation admits no projective tree");
  }
  const double one = 1.0;
  kernel.backward(std::span<const double>(&one, 1));
  if (log_partition != nullptr) *log_partition = kernel.log_partition()[0];
  return kernel.marginals(0);
}

}  // namespace treecrf
