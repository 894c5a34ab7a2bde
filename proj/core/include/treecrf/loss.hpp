#pragma once

// Training losses and their gradients with respect to the score tensors.
// Batched variants sum per-sentence losses.

#include <span>
#include <vector>

#include "treecrf/inside.hpp"
#include "treecrf/types.hpp"

namespace treecrf {

struct LossResult {
  double value = 0.0;
  // One (n+1)^2 gradient per sentence, laid out like ArcScores.
  std::vector<std::vector<double>> arc_grad;
  // One (n+1)^3 gradient per sentence (SibScores layout), or empty.
  std::vector<std::vector<double>> sib_grad;
};

// -log p(gold | x) = -s(x, gold) + log Z(x). Throws std::invalid_argument
// for a non-projective or illegal gold tree.
LossResult crf_loss(std::span<const ArcScores> arcs,
                    std::span<const SibScores> sibs,
                    std::span<const DepTree> gold,
                    const InferenceOptions& opts = {});
LossResult crf_loss(const ArcScores& arcs, const SibScores* sibs,
                    const DepTree& gold, const InferenceOptions& opts = {});

// -log Z(x, y^p) + log Z(x). Throws std::domain_error when the annotation
// admits no projective tree.
LossResult partial_crf_loss(std::span<const ArcScores> arcs,
                            std::span<const SibScores> sibs,
                            std::span<const PartialTree> partial,
                            const InferenceOptions& opts = {});
LossResult partial_crf_loss(const ArcScores& arcs, const SibScores* sibs,
                            const PartialTree& partial,
                            const InferenceOptions& opts = {});

// Head-selection cross entropy: for every annotated word j, a softmax over
// candidate heads {0..n} \ {j}. Unannotated words contribute nothing.
LossResult local_ce_loss(std::span<const ArcScores> arcs,
                         std::span<const PartialTree> gold);
LossResult local_ce_loss(const ArcScores& arcs, const PartialTree& gold);
inline LossResult local_ce_loss(const ArcScores& arcs, const DepTree& gold) {
  return local_ce_loss(arcs, PartialTree::from_tree(gold));
}

// Softmax cross entropy over labels on the gold arcs of annotated words
// with a known label (label id >= 0). Gradient has LabelScores layout.
struct LabelLossResult {
  double value = 0.0;
  std::vector<double> grad;
};
LabelLossResult label_ce_loss(const LabelScores& scores,
                              std::span<const int> heads,
                              std::span<const int> labels);

}  // namespace treecrf
