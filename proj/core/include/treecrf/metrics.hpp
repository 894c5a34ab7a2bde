#pragma once

// Attachment scores, complete-match rates and adjacent-sibling P/R/F.
//
// Words whose gold head is unannotated never count. Words matched by the
// punctuation filter are skipped as well. A sentence enters UCM/LCM only if
// at least one of its words is scored.

#include <set>
#include <span>
#include <string>
#include <vector>

#include "treecrf/conll.hpp"
#include "treecrf/types.hpp"

namespace treecrf {

// Skips a word whose CPOS or POS column is in `tags`.
struct PunctPolicy {
  std::set<std::string> tags;

  // UPOS PUNCT plus the Penn Treebank punctuation tags.
  static PunctPolicy defaults();
  static PunctPolicy none() { return {}; }
  bool is_punct(const ConllSentence& s, int j) const;
};

struct Metrics {
  long tokens = 0;
  long head_correct = 0;
  long label_correct = 0;
  long sentences = 0;
  long complete_unlabeled = 0;
  long complete_labeled = 0;

  double uas() const;
  double las() const;
  double ucm() const;
  double lcm() const;

  // "key=value" lines.
  std::string key_values() const;
  std::string table() const;
};

// `gold` heads may be kUnknownHead. Labels are compared when the gold tree
// has them; a prediction without labels then never matches. `skip`, if
// non-empty, marks words to exclude per sentence.
Metrics evaluate(std::span<const DepTree> pred, std::span<const DepTree> gold,
                 std::span<const std::vector<bool>> skip = {});

// Compares HEAD and DEPREL columns. Throws std::invalid_argument on a
// sentence count or length mismatch.
Metrics evaluate(std::span<const ConllSentence> pred,
                 std::span<const ConllSentence> gold,
                 const PunctPolicy& punct = PunctPolicy::defaults());

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged over the corpus, in percent. Precision is 0 when the
// prediction has no triples but the gold does; all three are 100 when both
// are empty. Throws std::invalid_argument for an incomplete gold tree.
Prf sib_prf(std::span<const DepTree> pred, std::span<const DepTree> gold);

}  // namespace treecrf
