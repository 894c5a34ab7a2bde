#pragma once

#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "treecrf/types.hpp"

namespace treecrf {

// Head `head` with consecutive same-side modifiers `sib` (inner) and `mod`
// (outer).
struct SibTriple {
  int head;
  int sib;
  int mod;

  friend auto operator<=>(const SibTriple&, const SibTriple&) = default;
};

// Linear-time check that `heads` is a tree rooted at 0 under `policy`.
bool is_legal_tree(std::span<const int> heads,
                   RootPolicy policy = RootPolicy::kSingle);

// Throws std::invalid_argument for an illegal tree. Legality here is the
// policy-free notion (rooted and acyclic).
bool is_projective(const DepTree& tree);

std::vector<SibTriple> extract_sib_triples(const DepTree& tree);

// Sum of arc scores plus, when `sibs` is given, the scores of every
// adjacent-sibling triple in the tree.
double tree_score(const ArcScores& arcs, const SibScores* sibs,
                  const DepTree& tree);
inline double tree_score(const ArcScores& arcs, const DepTree& tree) {
  return tree_score(arcs, nullptr, tree);
}

// Exhaustive, duplicate-free list of projective trees of n words. Guarded
// to n <= 8.
inline constexpr int kMaxEnumerationLength = 8;
std::vector<DepTree> enumerate_projective_trees(
    int n, RootPolicy policy = RootPolicy::kSingle);

}  // namespace treecrf
