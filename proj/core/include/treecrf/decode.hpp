#pragma once

#include <optional>

#include "treecrf/inside.hpp"
#include "treecrf/types.hpp"

namespace treecrf {

struct DecodeResult {
  DepTree tree;
  double score = 0.0;  // model score, or marginal sum for MBR
  bool used_fast_path = false;
};

// Max-product first-order Eisner. Among equal-scoring derivations the
// smaller split point wins, then the smaller head index.
DecodeResult eisner1(const ArcScores& arcs,
                     RootPolicy root = RootPolicy::kSingle);

// Max-product second-order (adjacent sibling) Eisner.
DecodeResult eisner2(const ArcScores& arcs, const SibScores& sibs,
                     RootPolicy root = RootPolicy::kSingle);

// Projective tree maximizing the sum of arc marginals.
DecodeResult mbr_decode(const Marginals& marginals,
                        RootPolicy root = RootPolicy::kSingle);

// Assigns every word its highest-valued head (ties to the smaller head)
// and returns the result only if it is a legal projective tree.
std::optional<DepTree> greedy_fast_path(const ArcScores& values,
                                        RootPolicy root = RootPolicy::kSingle);

}  // namespace treecrf
