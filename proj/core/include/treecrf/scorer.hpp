#pragma once

// Score heads over token representations.
//
//   biaffine:   s(i, j)    = [r^m_j; 1]^T W r^h_i
//   triaffine:  s(i, k, j) = sum_{a,b,c} [r^s_k; 1]_a (r^h'_i)_b [r^m'_j; 1]_c W_abc
//   labels:     s(i, j, l) = [r^lm_j; 1]^T U_l [r^lh_i; 1]
//
// Representations are (n+1) x d matrices whose row 0 is the pseudo-root.
// Each head has an analytic backward pass taking dL/ds in the layout of
// the corresponding score container.

#include <span>
#include <vector>

#include "treecrf/params.hpp"
#include "treecrf/types.hpp"

namespace treecrf {

// Per-sentence role representations. Any group may be empty when the
// corresponding head is unused.
struct TokenReps {
  Mat arc_head;   // r^h
  Mat arc_mod;    // r^m
  Mat sib_head;   // r^h'
  Mat sib_sib;    // r^s
  Mat sib_mod;    // r^m'
  Mat label_head;
  Mat label_mod;

  int length() const { return static_cast<int>(arc_head.rows()) - 1; }
};

struct BiaffineParams {
  Mat weight;  // (d+1) x d, last row is the modifier bias

  static BiaffineParams zeros(int dim);
  int dim() const { return static_cast<int>(weight.cols()); }
};

struct TriaffineParams {
  // Logical shape (d'+1) x d' x (d'+1) indexed (sibling, head, modifier),
  // stored as (d'+1) rows of d'(d'+1) columns.
  Mat weight;

  static TriaffineParams zeros(int dim);
  int dim() const { return static_cast<int>(weight.rows()) - 1; }
  double at(int s, int h, int m) const {
    return weight(s, h * (dim() + 1) + m);
  }
  double& at(int s, int h, int m) { return weight(s, h * (dim() + 1) + m); }
};

struct LabelParams {
  // Logical shape L x (d+1) x (d+1) indexed (label, modifier, head).
  Mat weight;

  static LabelParams zeros(int num_labels, int dim);
  int num_labels() const { return static_cast<int>(weight.rows()); }
  int dim() const;
};

// Affine projection with a tanh nonlinearity: r = tanh(x W^T + b).
struct Projection {
  Mat weight;  // out x in
  Mat bias;    // 1 x out

  static Projection zeros(int in, int out);
  Mat forward(const Mat& x) const;
  // Given x, the forward output y and dL/dy, accumulates parameter grads
  // into `grad` and returns dL/dx.
  Mat backward(const Mat& x, const Mat& y, const Mat& dy,
               Projection& grad) const;
};

ArcScores biaffine_score(const Mat& head, const Mat& mod,
                         const BiaffineParams& params);
inline ArcScores biaffine_score(const TokenReps& reps,
                                const BiaffineParams& params) {
  return biaffine_score(reps.arc_head, reps.arc_mod, params);
}

// `grad` holds dL/ds(i, j) in ArcScores layout; invalid cells are ignored.
void biaffine_backward(const Mat& head, const Mat& mod,
                       const BiaffineParams& params,
                       std::span<const double> grad, BiaffineParams& dparams,
                       Mat& dhead, Mat& dmod);

SibScores triaffine_score(const Mat& head, const Mat& sib, const Mat& mod,
                          const TriaffineParams& params);
inline SibScores triaffine_score(const TokenReps& reps,
                                 const TriaffineParams& params) {
  return triaffine_score(reps.sib_head, reps.sib_sib, reps.sib_mod, params);
}

void triaffine_backward(const Mat& head, const Mat& sib, const Mat& mod,
                        const TriaffineParams& params,
                        std::span<const double> grad, TriaffineParams& dparams,
                        Mat& dhead, Mat& dsib, Mat& dmod);

LabelScores label_score(const Mat& head, const Mat& mod,
                        const LabelParams& params);

void label_backward(const Mat& head, const Mat& mod, const LabelParams& params,
                    std::span<const double> grad, LabelParams& dparams,
                    Mat& dhead, Mat& dmod);

}  // namespace treecrf
