#pragma once

// Deterministic generator of small projective treebanks from a toy
// English-like grammar. Used for end-to-end training checks and as CLI
// fixtures.

#include <cstdint>
#include <span>
#include <vector>

#include "treecrf/conll.hpp"

namespace treecrf {

// `count` sentences with UPOS in both POS columns and UD-style relations.
std::vector<ConllSentence> make_toy_treebank(int count, std::uint64_t seed);

// Copy of `sentences` in which each head (and its relation) is dropped
// with probability 1 - keep. At least one word per sentence stays
// annotated.
std::vector<ConllSentence> mask_heads(std::span<const ConllSentence> sentences,
                                      double keep, std::uint64_t seed);

}  // namespace treecrf
