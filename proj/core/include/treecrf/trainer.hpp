#pragma once

// Training loop, batch parsing and marginal dumps over CoNLL sentences.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "treecrf/conll.hpp"
#include "treecrf/metrics.hpp"
#include "treecrf/model.hpp"
#include "treecrf/params.hpp"

namespace treecrf {

struct TrainOptions {
  ModelConfig model;
  DecodeMode decode = DecodeMode::kViterbi;  // used for dev evaluation
  SgdOptions sgd{0.05, 0.9, 5.0};
  int max_epochs = 1000;
  // Stop once `patience` + 1 epochs pass without a better dev LAS.
  int patience = 100;
  int batch_size = 8;
  std::uint64_t seed = 1;
  // Stop as soon as the dev UAS reaches 100.
  bool stop_when_perfect = false;
  PunctPolicy punct = PunctPolicy::defaults();
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  Metrics dev;
};

struct TrainResult {
  Model model;  // parameters of the best dev epoch
  int best_epoch = 0;
  std::vector<EpochStats> epochs;
  int skipped = 0;  // training sentences not usable under the chosen loss
};

// Words and labels of `sentences` after the reserved entries.
Vocab build_vocab(std::span<const ConllSentence> sentences);

std::vector<int> encode_words(const Vocab& vocab, const ConllSentence& sentence);

// Throws std::invalid_argument for inconsistent options and
// std::runtime_error when no training sentence is usable. One line per
// epoch and one per skipped sentence go to `log`.
TrainResult train_model(const TrainOptions& opts,
                        std::span<const ConllSentence> train,
                        std::span<const ConllSentence> dev, std::ostream* log);

struct ParseStats {
  long sentences = 0;
  long fast_path_hits = 0;

  double hit_rate() const {
    return sentences == 0 ? 0.0 : 100.0 * fast_path_hits / sentences;
  }
};

// Copies of `input` with predicted HEAD and DEPREL columns.
std::vector<ConllSentence> parse_sentences(const Model& model,
                                           std::span<const ConllSentence> input,
                                           DecodeMode mode,
                                           ParseStats* stats = nullptr);

// Arc (and optionally sibling) marginals of every sentence in score-file
// format.
void write_marginals(const Model& model, std::span<const ConllSentence> input,
                     std::ostream& out, bool with_sib);

}  // namespace treecrf
