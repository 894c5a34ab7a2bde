#pragma once

// Batched log-space inside algorithms over projective trees, and marginal
// probabilities obtained by reverse accumulation through the same chart
// recurrences.
//
// Chart layout: for sentence b, the (i, j) cell with i < j holds the
// rightward item headed at i, the (j, i) cell holds the leftward item
// headed at j. Three tables are kept, as in the second-order Eisner
// algorithm: incomplete spans (I), sibling spans (S) and complete spans
// (C). First-order inference leaves S unused.
//
// Under RootPolicy::kMulti the recurrences run verbatim with the root at
// position 0 and log Z = C(0, n). Under RootPolicy::kSingle they run over
// words 1..n only and
//   log Z = logsumexp_r [ s(0, r) + C(r, 1) + C(r, n) ].

#include <optional>
#include <span>
#include <vector>

#include "treecrf/types.hpp"

namespace treecrf {

struct InferenceOptions {
  RootPolicy root = RootPolicy::kSingle;
};

// Log-space chart tables for a batch, each B x (n_max+1) x (n_max+1).
// Internally cells that admit no derivation hold IEEE -infinity.
class ChartSet {
 public:
  ChartSet() = default;
  ChartSet(std::vector<int> lengths, bool second_order);

  int batch_size() const { return static_cast<int>(lengths_.size()); }
  int max_length() const { return max_len_; }
  int stride() const { return max_len_ + 1; }
  const std::vector<int>& lengths() const { return lengths_; }
  bool second_order() const { return second_order_; }
  bool valid(int b, int pos) const { return pos <= lengths_[b]; }

  std::size_t index(int b, int i, int j) const {
    const std::size_t s = stride();
    return (b * s + i) * s + j;
  }

  double incomplete(int b, int i, int j) const { return inc_[index(b, i, j)]; }
  double sibling(int b, int i, int j) const { return sib_[index(b, i, j)]; }
  double complete(int b, int i, int j) const { return comp_[index(b, i, j)]; }

 private:
  friend class InsideKernel;

  std::vector<int> lengths_;
  int max_len_ = 0;
  bool second_order_ = false;
  std::vector<double> inc_;    // I, including the arc score
  std::vector<double> inner_;  // I without the arc score
  std::vector<double> sib_;    // S, mirrored into both triangles
  std::vector<double> comp_;   // C
  std::vector<double> compT_;  // C transposed, for contiguous split loops
};

struct InsideResult {
  std::vector<double> log_partition;  // one log Z per sentence
  ChartSet charts;
};

struct Marginals {
  int n = 0;
  std::vector<double> arc;  // (n+1)^2, entry (i, j) = p(i -> j | x)
  std::vector<double> sib;  // (n+1)^3 adjacent-sibling marginals, or empty

  double arc_at(int head, int mod) const { return arc[head * (n + 1) + mod]; }
  double sib_at(int head, int s, int mod) const {
    return sib[(head * (n + 1) + s) * (n + 1) + mod];
  }
  bool has_sib() const { return !sib.empty(); }
  // Arc marginals as a score matrix, for decoders.
  ArcScores arc_matrix() const;
};

InsideResult inside_first_order(std::span<const ArcScores> batch,
                                const InferenceOptions& opts = {});

InsideResult inside_second_order(std::span<const ArcScores> arcs,
                                 std::span<const SibScores> sibs,
                                 const InferenceOptions& opts = {});

// log Z(x, y^p): the inside value restricted to trees containing every
// annotated arc. Returns kNegInf when no projective tree is compatible
// with the annotation.
double constrained_inside(const ArcScores& arcs, const SibScores* sibs,
                          const PartialTree& partial,
                          const InferenceOptions& opts = {});

// Batched marginals: adjoints of log Z with respect to every score.
std::vector<Marginals> batch_marginals(std::span<const ArcScores> arcs,
                                       std::span<const SibScores> sibs,
                                       const InferenceOptions& opts = {},
                                       std::vector<double>* log_partition = nullptr);

Marginals marginals(const ArcScores& arcs, const SibScores* sibs = nullptr,
                    const InferenceOptions& opts = {});

// Marginals of the distribution restricted to trees compatible with
// `partial`. Throws std::domain_error when no such tree exists.
Marginals constrained_marginals(const ArcScores& arcs, const SibScores* sibs,
                                const PartialTree& partial,
                                const InferenceOptions& opts = {},
                                double* log_partition = nullptr);

// Copy of `arcs` where every arc contradicting an annotated head is masked.
ArcScores mask_arcs(const ArcScores& arcs, const PartialTree& partial);

}  // namespace treecrf
