#pragma once

// A complete toy parser: embedding-window encoder, role projections, the
// biaffine arc head, the optional triaffine sibling head and a per-arc
// label head. The encoder only stands in for a neural context encoder;
// callers that have their own representations can drive the score heads in
// scorer.hpp directly.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "treecrf/decode.hpp"
#include "treecrf/inside.hpp"
#include "treecrf/params.hpp"
#include "treecrf/scorer.hpp"

namespace treecrf {

enum class ModelMode { kLocal, kCrf, kCrf2o };

const char* to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& name);

enum class DecodeMode { kViterbi, kMbr, kGreedy };

const char* to_string(DecodeMode mode);
DecodeMode decode_mode_from_string(const std::string& name);

struct ModelConfig {
  ModelMode mode = ModelMode::kCrf;
  RootPolicy root = RootPolicy::kSingle;
  int word_dim = 50;
  int pos_dim = 20;
  int max_position = 256;
  int arc_dim = 100;    // d
  int sib_dim = 100;    // d'
  int label_dim = 50;
  double label_weight = 1.0;  // weight of the label loss against the arc loss
};

class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kRoot = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocab();
  Vocab(std::vector<std::string> words, std::vector<std::string> labels);

  int add_word(const std::string& w);
  int add_label(const std::string& l);
  int word_id(const std::string& w) const;
  // -1 for an unknown label.
  int label_id(const std::string& l) const;

  int num_words() const { return static_cast<int>(words_.size()); }
  int num_labels() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int id) const { return labels_.at(id); }

 private:
  std::vector<std::string> words_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> word_index_;
  std::unordered_map<std::string, int> label_index_;
};

struct ModelParams {
  Mat word_emb;  // V x word_dim
  Mat pos_emb;   // max_position x pos_dim
  Projection arc_head, arc_mod;
  Projection sib_head, sib_sib, sib_mod;
  Projection label_head, label_mod;
  BiaffineParams arc;
  TriaffineParams sib;
  LabelParams label;

  std::vector<NamedParam> named(const ModelConfig& config);
  void set_zero();
};

// Activations retained by Model::forward for the backward pass.
struct ForwardState {
  std::vector<int> ids;  // word ids of positions 0..n
  Mat input;             // (n+1) x input_dim encoder output
  TokenReps reps;
  ArcScores arcs;
  SibScores sibs;        // empty (n == 0) unless mode is crf2o
  LabelScores labels;
  bool ready = false;

  int length() const { return static_cast<int>(ids.size()) - 1; }
};

struct Prediction {
  DepTree tree;  // heads and label ids
  bool used_fast_path = false;
};

class Model {
 public:
  Model(ModelConfig config, Vocab vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  ModelParams& params() { return params_; }
  std::vector<NamedParam> named_params() { return params_.named(config_); }

  // A zero-valued parameter set with this model's shapes.
  ModelParams zero_grads() const;

  // `word_ids` covers words 1..n (the pseudo-root is added internally).
  ForwardState forward(std::span<const int> word_ids) const;

  // Accumulates parameter gradients given dL/d(scores). `sib_grad` may be
  // empty for first-order modes; `label_grad` may be empty.
  void backward(const ForwardState& state, std::span<const double> arc_grad,
                std::span<const double> sib_grad,
                std::span<const double> label_grad, ModelParams& grads) const;

  InferenceOptions inference_options() const { return {config_.root}; }

  // Unlabeled tree for the scores in `state`, then labels by argmax on the
  // predicted arcs.
  Prediction predict(const ForwardState& state, DecodeMode mode) const;
  Marginals marginals(const ForwardState& state) const;

  void save(std::ostream& out) const;
  static Model load(std::istream& in);

 private:
  ModelConfig config_;
  Vocab vocab_;
  ModelParams params_;
  int input_dim_ = 0;
};

}  // namespace treecrf
