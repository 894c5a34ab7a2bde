#include "treecrf/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "treecrf/loss.hpp"
#include "treecrf/score_file.hpp"
#include "treecrf/tree.hpp"

namespace treecrf {

namespace {

struct Example {
  std::vector<int> words;
  PartialTree heads;
  std::vector<int> labels;  // -1 where unknown
};

// Why a sentence cannot be used with the CRF losses, or nullptr.
const char* crf_problem(const PartialTree& heads, RootPolicy root) {
  if (heads.num_annotated() == 0) return "no annotated heads";
  if (heads.complete()) {
    if (!is_legal_tree(heads.heads, root)) return "illegal tree for root policy";
    if (!is_projective(heads.to_tree())) return "non-projective";
    return nullptr;
  }
  ArcScores zero(heads.n());
  for (int i = 0; i <= heads.n(); ++i)
    for (int j = 1; j <= heads.n(); ++j)
      if (i != j) zero.at(i, j) = 0.0;
  if (is_neg_inf(constrained_inside(zero, nullptr, heads, {root}))) {
    return "annotation admits no projective tree";
  }
  return nullptr;
}

void validate(const TrainOptions& opts) {
  if (opts.max_epochs < 1 || opts.patience < 0 || opts.batch_size < 1) {
    throw std::invalid_argument(
        "train: need max_epochs >= 1, patience >= 0, batch_size >= 1");
  }
  if (opts.model.mode == ModelMode::kLocal && opts.decode == DecodeMode::kMbr) {
    throw std::invalid_argument("mbr decoding requires a crf or crf2o model");
  }
}

double sentence_step(const Model& model, const Example& ex, ModelParams& grads) {
  const ModelConfig& cfg = model.config();
  const ForwardState st = model.forward(ex.words);
  const InferenceOptions io = model.inference_options();
  LossResult arc;
  switch (cfg.mode) {
    case ModelMode::kLocal:
      arc = local_ce_loss(st.arcs, ex.heads);
      break;
    case ModelMode::kCrf:
    case ModelMode::kCrf2o: {
      const SibScores* sibs = cfg.mode == ModelMode::kCrf2o ? &st.sibs : nullptr;
      arc = ex.heads.complete() ? crf_loss(st.arcs, sibs, ex.heads.to_tree(), io)
                                : partial_crf_loss(st.arcs, sibs, ex.heads, io);
      break;
    }
  }
  double value = arc.value;
  std::vector<double> label_grad;
  if (model.vocab().num_labels() > 0) {
    LabelLossResult lab = label_ce_loss(st.labels, ex.heads.heads, ex.labels);
    value += cfg.label_weight * lab.value;
    for (double& g : lab.grad) g *= cfg.label_weight;
    label_grad = std::move(lab.grad);
  }
  const std::vector<double> no_sib;
  model.backward(st, arc.arc_grad[0],
                 arc.sib_grad.empty() ? no_sib : arc.sib_grad[0], label_grad,
                 grads);
  return value;
}

}  // namespace

Vocab build_vocab(std::span<const ConllSentence> sentences) {
  Vocab v;
  for (const auto& s : sentences) {
    for (int j = 1; j <= s.n(); ++j) {
      v.add_word(s.form(j));
      if (s.head(j) != kUnknownHead && s.deprel(j) != "_") v.add_label(s.deprel(j));
    }
  }
  return v;
}

std::vector<int> encode_words(const Vocab& vocab, const ConllSentence& sentence) {
  std::vector<int> ids;
  ids.reserve(sentence.n());
  for (int j = 1; j <= sentence.n(); ++j) ids.push_back(vocab.word_id(sentence.form(j)));
  return ids;
}

TrainResult train_model(const TrainOptions& opts,
                        std::span<const ConllSentence> train,
                        std::span<const ConllSentence> dev, std::ostream* log) {
  validate(opts);
  Model model(opts.model, build_vocab(train), opts.seed);
  TrainResult result{model, 0, {}, 0};

  std::vector<Example> examples;
  for (std::size_t k = 0; k < train.size(); ++k) {
    const ConllSentence& s = train[k];
    Example ex{encode_words(model.vocab(), s), s.partial_tree(), {}};
    for (int j = 1; j <= s.n(); ++j) {
      ex.labels.push_back(s.head(j) == kUnknownHead ? -1
                                                    : model.vocab().label_id(s.deprel(j)));
    }
    const char* problem = nullptr;
    if (!ex.heads.consistent()) {
      problem = "inconsistent annotation";
    } else if (opts.model.mode != ModelMode::kLocal) {
      problem = crf_problem(ex.heads, opts.model.root);
    } else if (ex.heads.num_annotated() == 0) {
      problem = "no annotated heads";
    }
    if (problem) {
      ++result.skipped;
      if (log) *log << "warning: skipping training sentence " << k + 1 << ": " << problem << '\n';
      continue;
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw std::runtime_error("train: no usable training sentences");

  std::mt19937_64 rng(opts.seed);
  SgdOptimizer optimizer(opts.sgd);
  ModelParams grads = model.zero_grads();
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  double best_las = -1.0;

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      grads.set_zero();
      const std::size_t stop = std::min(order.size(), start + opts.batch_size);
      for (std::size_t k = start; k < stop; ++k) {
        total += sentence_step(model, examples[order[k]], grads);
      }
      optimizer.step(model.named_params(), grads.named(opts.model));
    }

    EpochStats stats{epoch, total, {}};
    const auto predicted = parse_sentences(model, dev, opts.decode);
    stats.dev = evaluate(predicted, dev, opts.punct);
    result.epochs.push_back(stats);
    if (log) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "epoch %d loss %.6f dev UAS %.2f LAS %.2f",
                    epoch, total, stats.dev.uas(), stats.dev.las());
      *log << buf << '\n';
    }
    const bool perfect = opts.stop_when_perfect && stats.dev.uas() >= 100.0;
    if (stats.dev.las() > best_las || perfect) {
      best_las = stats.dev.las();
      result.best_epoch = epoch;
      result.model = model;
    }
    if (perfect) {
      if (log) *log << "dev UAS reached 100 at epoch " << epoch << '\n';
      break;
    }
    if (epoch - result.best_epoch > opts.patience) {
      if (log) {
        *log << "early stop after epoch " << epoch << ", best epoch "
             << result.best_epoch << '\n';
      }
      break;
    }
  }
  return result;
}

std::vector<ConllSentence> parse_sentences(const Model& model,
                                           std::span<const ConllSentence> input,
                                           DecodeMode mode, ParseStats* stats) {
  std::vector<ConllSentence> out(input.begin(), input.end());
  const bool labeled = model.vocab().num_labels() > 0;
  for (auto& s : out) {
    if (s.n() == 0) continue;
    const ForwardState st = model.forward(encode_words(model.vocab(), s));
    const Prediction p = model.predict(st, mode);
    std::vector<std::string> labels;
    if (labeled) {
      for (int id : p.tree.labels) labels.push_back(model.vocab().label(id));
    }
    s.set_heads(p.tree.heads, labels);
    if (stats) {
      ++stats->sentences;
      stats->fast_path_hits += p.used_fast_path;
    }
  }
  return out;
}

void write_marginals(const Model& model, std::span<const ConllSentence> input,
                     std::ostream& out, bool with_sib) {
  for (std::size_t k = 0; k < input.size(); ++k) {
    const ForwardState st = model.forward(encode_words(model.vocab(), input[k]));
    const Marginals m = model.marginals(st);
    write_score_record(out, static_cast<int>(k + 1), m.n, m.arc,
                       with_sib ? std::span<const double>(m.sib)
                                : std::span<const double>());
  }
}

}  // namespace treecrf
