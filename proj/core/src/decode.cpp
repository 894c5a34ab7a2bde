#include "treecrf/decode.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "treecrf/tree.hpp"

namespace treecrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Max-product charts for one sentence with split-point backpointers. The
// cell layout mirrors the inside charts: (h, e) is the item headed at h
// whose far end is e.
class ViterbiChart {
 public:
  ViterbiChart(const ArcScores& arcs, const SibScores* sibs, RootPolicy root)
      : n_(arcs.n()),
        s_(n_ + 1),
        lo_(root == RootPolicy::kSingle ? 1 : 0),
        root_(root),
        arcs_(arcs),
        sibs_(sibs),
        inc_(s_ * s_, -kInf),
        sib_(s_ * s_, -kInf),
        comp_(s_ * s_, -kInf),
        bp_inc_(s_ * s_, -1),
        bp_sib_(s_ * s_, -1),
        bp_comp_(s_ * s_, -1),
        heads_(n_, 0) {
    for (int i = 0; i <= n_; ++i) comp_[at(i, i)] = 0.0;
  }

  DecodeResult run() {
    for (int w = 1; w <= n_; ++w) {
      for (int i = lo_; i + w <= n_; ++i) {
        const int j = i + w;
        if (sibs_ != nullptr) {
          incomplete2(i, j);
          if (i >= 1) sibling(i, j);
        } else {
          incomplete1(i, j);
        }
        complete(i, j);
      }
    }
    DecodeResult result;
    if (root_ == RootPolicy::kMulti) {
      result.score = comp_[at(0, n_)];
      backtrack_complete(0, n_);
    } else {
      int best = -1;
      double best_score = -kInf;
      for (int r = 1; r <= n_; ++r) {
        const double v = arcs_(0, r) + comp_[at(r, 1)] + comp_[at(r, n_)];
        if (best < 0 || v > best_score) {
          best = r;
          best_score = v;
        }
      }
      result.score = best_score;
      heads_[best - 1] = 0;
      backtrack_complete(best, 1);
      backtrack_complete(best, n_);
    }
    result.tree = DepTree(heads_);
    return result;
  }

 private:
  std::size_t at(int i, int j) const { return i * s_ + j; }

  void incomplete1(int i, int j) {
    double best = -kInf;
    int arg = -1;
    for (int r = i; r < j; ++r) {
      const double v = comp_[at(i, r)] + comp_[at(j, r + 1)];
      if (arg < 0 || v > best) {
        best = v;
        arg = r;
      }
    }
    inc_[at(i, j)] = arcs_(i, j) + best;
    bp_inc_[at(i, j)] = arg;
    if (i >= 1) {
      inc_[at(j, i)] = arcs_(j, i) + best;
      bp_inc_[at(j, i)] = arg;
    }
  }

  // Backpointer == head marks the first-child case (no inner sibling).
  void incomplete2(int i, int j) {
    double best = comp_[at(j, i + 1)];
    int arg = i;
    for (int r = i + 1; r < j; ++r) {
      const double v = inc_[at(i, r)] + sib_[at(r, j)] + (*sibs_)(i, r, j);
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    inc_[at(i, j)] = arcs_(i, j) + best;
    bp_inc_[at(i, j)] = arg;
    if (i == 0) return;

    best = comp_[at(i, j - 1)];
    arg = j;
    for (int r = i + 1; r < j; ++r) {
      const double v = inc_[at(j, r)] + sib_[at(i, r)] + (*sibs_)(j, r, i);
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    inc_[at(j, i)] = arcs_(j, i) + best;
    bp_inc_[at(j, i)] = arg;
  }

  void sibling(int i, int j) {
    double best = -kInf;
    int arg = -1;
    for (int r = i; r < j; ++r) {
      const double v = comp_[at(i, r)] + comp_[at(j, r + 1)];
      if (arg < 0 || v > best) {
        best = v;
        arg = r;
      }
    }
    sib_[at(i, j)] = sib_[at(j, i)] = best;
    bp_sib_[at(i, j)] = arg;
  }

  void complete(int i, int j) {
    double best = -kInf;
    int arg = -1;
    for (int r = i + 1; r <= j; ++r) {
      const double v = inc_[at(i, r)] + comp_[at(r, j)];
      if (arg < 0 || v > best) {
        best = v;
        arg = r;
      }
    }
    comp_[at(i, j)] = best;
    bp_comp_[at(i, j)] = arg;
    if (i == 0) return;

    best = -kInf;
    arg = -1;
    for (int r = i; r < j; ++r) {
      const double v = inc_[at(j, r)] + comp_[at(r, i)];
      if (arg < 0 || v > best) {
        best = v;
        arg = r;
      }
    }
    comp_[at(j, i)] = best;
    bp_comp_[at(j, i)] = arg;
  }

  // C(h, e) = I(h, r) + C(r, e) in either direction.
  void backtrack_complete(int h, int e) {
    if (h == e) return;
    const int r = bp_comp_[at(h, e)];
    backtrack_incomplete(h, r);
    backtrack_complete(r, e);
  }

  void backtrack_incomplete(int h, int m) {
    heads_[m - 1] = h;
    const int r = bp_inc_[at(h, m)];
    if (sibs_ == nullptr) {
      const int i = std::min(h, m), j = std::max(h, m);
      backtrack_complete(i, r);
      backtrack_complete(j, r + 1);
      return;
    }
    if (r == h) {
      backtrack_complete(m, h < m ? h + 1 : h - 1);
    } else {
      backtrack_incomplete(h, r);
      backtrack_sibling(std::min(r, m), std::max(r, m));
    }
  }

  void backtrack_sibling(int i, int j) {
    const int r = bp_sib_[at(i, j)];
    backtrack_complete(i, r);
    backtrack_complete(j, r + 1);
  }

  int n_;
  std::size_t s_;
  int lo_;
  RootPolicy root_;
  const ArcScores& arcs_;
  const SibScores* sibs_;
  std::vector<double> inc_, sib_, comp_;
  std::vector<int> bp_inc_, bp_sib_, bp_comp_;
  std::vector<int> heads_;
};

}  // namespace

DecodeResult eisner1(const ArcScores& arcs, RootPolicy root) {
  if (arcs.n() < 1) throw std::invalid_argument("eisner1: no words");
  arcs.check_finite();
  return ViterbiChart(arcs, nullptr, root).run();
}

DecodeResult eisner2(const ArcScores& arcs, const SibScores& sibs,
                     RootPolicy root) {
  if (arcs.n() < 1) throw std::invalid_argument("eisner2: no words");
  if (sibs.n() != arcs.n()) {
    throw std::invalid_argument("eisner2: arc and sibling dimensions differ");
  }
  arcs.check_finite();
  sibs.check_finite();
  return ViterbiChart(arcs, &sibs, root).run();
}

DecodeResult mbr_decode(const Marginals& marginals, RootPolicy root) {
  return eisner1(marginals.arc_matrix(), root);
}

std::optional<DepTree> greedy_fast_path(const ArcScores& values,
                                        RootPolicy root) {
  const int n = values.n();
  std::vector<int> heads(n, 0);
  for (int j = 1; j <= n; ++j) {
    int best = -1;
    for (int i = 0; i <= n; ++i) {
      if (i == j) continue;
      if (best < 0 || values(i, j) > values(best, j)) best = i;
    }
    heads[j - 1] = best;
  }
  if (!is_legal_tree(heads, root)) return std::nullopt;
  DepTree tree(std::move(heads));
  if (!is_projective(tree)) return std::nullopt;
  return tree;
}

}  // namespace treecrf
