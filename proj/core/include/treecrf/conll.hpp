#pragma once

// CoNLL-X and CoNLL-U reading and writing.
//
// Every input line of a sentence is kept verbatim so that writing an
// unmodified sentence reproduces its input. Multiword ranges ("3-4") and
// empty nodes ("5.1") are allowed in CoNLL-U only; they are carried through
// I/O but never get a word index.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treecrf/types.hpp"

namespace treecrf {

enum class ConllDialect { kConllX, kConllU };

const char* to_string(ConllDialect dialect);
ConllDialect conll_dialect_from_string(const std::string& name);

// Column indices shared by both dialects.
namespace conll_col {
inline constexpr int kId = 0;
inline constexpr int kForm = 1;
inline constexpr int kLemma = 2;
inline constexpr int kCpos = 3;  // UPOS in CoNLL-U
inline constexpr int kPos = 4;   // XPOS in CoNLL-U
inline constexpr int kFeats = 5;
inline constexpr int kHead = 6;
inline constexpr int kDeprel = 7;
}  // namespace conll_col

using ConllRow = std::array<std::string, 10>;

class ConllSentence {
 public:
  std::vector<std::string> comments;  // '#' lines, without the newline
  std::vector<ConllRow> rows;         // all token rows in file order

  // Number of words (multiword and empty-node rows excluded).
  int n() const { return static_cast<int>(word_rows_.size()); }

  const ConllRow& word(int j) const { return rows[word_rows_[j - 1]]; }
  const std::string& form(int j) const { return word(j)[conll_col::kForm]; }
  const std::string& deprel(int j) const {
    return word(j)[conll_col::kDeprel];
  }
  // kUnknownHead for '_'.
  int head(int j) const { return heads_[j - 1]; }

  PartialTree partial_tree() const { return PartialTree(heads_); }
  // Throws std::invalid_argument if some head is unannotated.
  DepTree tree() const;
  std::vector<std::string> forms() const;

  // Replaces HEAD and, when `labels` is non-empty, DEPREL of every word.
  void set_heads(std::span<const int> heads,
                 std::span<const std::string> labels = {});

  // Rebuilds the word index and heads from `rows`; throws
  // std::invalid_argument on malformed ids or heads.
  void reindex(ConllDialect dialect);

  static ConllSentence from_words(std::span<const std::string> forms);

 private:
  std::vector<int> word_rows_;
  std::vector<int> heads_;
};

// Throws std::runtime_error naming `source` and the 1-based line number on
// malformed input.
std::vector<ConllSentence> read_conll(std::istream& in, ConllDialect dialect,
                                      const std::string& source = "<input>");
std::vector<ConllSentence> read_conll_file(const std::string& path,
                                           ConllDialect dialect);

void write_conll(std::ostream& out, std::span<const ConllSentence> sentences);
void write_conll_file(const std::string& path,
                      std::span<const ConllSentence> sentences);

}  // namespace treecrf
