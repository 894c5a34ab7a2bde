#include "treecrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace treecrf {

const char* to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::kLocal: return "loc";
    case ModelMode::kCrf: return "crf";
    case ModelMode::kCrf2o: return "crf2o";
  }
  return "?";
}

ModelMode model_mode_from_string(const std::string& name) {
  if (name == "loc") return ModelMode::kLocal;
  if (name == "crf") return ModelMode::kCrf;
  if (name == "crf2o") return ModelMode::kCrf2o;
  throw std::invalid_argument("unknown model mode: " + name);
}

const char* to_string(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kViterbi: return "viterbi";
    case DecodeMode::kMbr: return "mbr";
    case DecodeMode::kGreedy: return "greedy";
  }
  return "?";
}

DecodeMode decode_mode_from_string(const std::string& name) {
  if (name == "viterbi") return DecodeMode::kViterbi;
  if (name == "mbr") return DecodeMode::kMbr;
  if (name == "greedy") return DecodeMode::kGreedy;
  throw std::invalid_argument("unknown decode mode: " + name);
}

Vocab::Vocab() {
  for (const char* w : {"<unk>", "<root>", "<bos>", "<eos>"}) add_word(w);
}

Vocab::Vocab(std::vector<std::string> words, std::vector<std::string> labels) {
  for (auto& w : words) add_word(w);
  for (auto& l : labels) add_label(l);
  if (num_words() < 4 || words_[kUnk] != "<unk>" || words_[kRoot] != "<root>") {
    throw std::invalid_argument("vocab: reserved entries missing");
  }
}

int Vocab::add_word(const std::string& w) {
  auto [it, inserted] = word_index_.emplace(w, num_words());
  if (inserted) words_.push_back(w);
  return it->second;
}

int Vocab::add_label(const std::string& l) {
  auto [it, inserted] = label_index_.emplace(l, num_labels());
  if (inserted) labels_.push_back(l);
  return it->second;
}

int Vocab::word_id(const std::string& w) const {
  auto it = word_index_.find(w);
  return it == word_index_.end() ? kUnk : it->second;
}

int Vocab::label_id(const std::string& l) const {
  auto it = label_index_.find(l);
  return it == label_index_.end() ? -1 : it->second;
}

namespace {

void add_projection(std::vector<NamedParam>& out, const std::string& name,
                    Projection& p) {
  out.push_back({name + ".weight", &p.weight,
                 {static_cast<int>(p.weight.rows()),
                  static_cast<int>(p.weight.cols())}});
  out.push_back({name + ".bias", &p.bias, {static_cast<int>(p.bias.cols())}});
}

void init_projection(Projection& p, int in, int out, std::mt19937_64& rng) {
  p = Projection::zeros(in, out);
  const double bound = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index k = 0; k < p.weight.size(); ++k) {
    p.weight.data()[k] = dist(rng);
  }
}

void fill_normal(Mat& m, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
}

bool has_sib(const ModelConfig& c) { return c.mode == ModelMode::kCrf2o; }

}  // namespace

std::vector<NamedParam> ModelParams::named(const ModelConfig& config) {
  std::vector<NamedParam> out;
  out.push_back({"embed.word", &word_emb,
                 {static_cast<int>(word_emb.rows()),
                  static_cast<int>(word_emb.cols())}});
  out.push_back({"embed.position", &pos_emb,
                 {static_cast<int>(pos_emb.rows()),
                  static_cast<int>(pos_emb.cols())}});
  add_projection(out, "arc.head", arc_head);
  add_projection(out, "arc.mod", arc_mod);
  out.push_back({"arc.biaffine", &arc.weight,
                 {config.arc_dim + 1, config.arc_dim}});
  if (has_sib(config)) {
    add_projection(out, "sib.head", sib_head);
    add_projection(out, "sib.sib", sib_sib);
    add_projection(out, "sib.mod", sib_mod);
    out.push_back({"sib.triaffine", &sib.weight,
                   {config.sib_dim + 1, config.sib_dim, config.sib_dim + 1}});
  }
  if (label.weight.rows() > 0) {
    add_projection(out, "label.head", label_head);
    add_projection(out, "label.mod", label_mod);
    out.push_back({"label.bilinear", &label.weight,
                   {static_cast<int>(label.weight.rows()), config.label_dim + 1,
                    config.label_dim + 1}});
  }
  return out;
}

void ModelParams::set_zero() {
  for (Mat* m : {&word_emb, &pos_emb, &arc_head.weight, &arc_head.bias,
                 &arc_mod.weight, &arc_mod.bias, &sib_head.weight,
                 &sib_head.bias, &sib_sib.weight, &sib_sib.bias,
                 &sib_mod.weight, &sib_mod.bias, &label_head.weight,
                 &label_head.bias, &label_mod.weight, &label_mod.bias,
                 &arc.weight, &sib.weight, &label.weight}) {
    m->setZero();
  }
}

Model::Model(ModelConfig config, Vocab vocab, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)) {
  if (config_.word_dim <= 0 || config_.pos_dim <= 0 || config_.arc_dim <= 0 ||
      config_.sib_dim <= 0 || config_.label_dim <= 0 ||
      config_.max_position <= 0) {
    throw std::invalid_argument("model: dimensions must be positive");
  }
  input_dim_ = 3 * config_.word_dim + config_.pos_dim;
  std::mt19937_64 rng(seed);

  params_.word_emb = Mat::Zero(vocab_.num_words(), config_.word_dim);
  params_.pos_emb = Mat::Zero(config_.max_position, config_.pos_dim);
  fill_normal(params_.word_emb, 1.0, rng);
  fill_normal(params_.pos_emb, 1.0, rng);

  init_projection(params_.arc_head, input_dim_, config_.arc_dim, rng);
  init_projection(params_.arc_mod, input_dim_, config_.arc_dim, rng);
  params_.arc = BiaffineParams::zeros(config_.arc_dim);
  if (has_sib(config_)) {
    init_projection(params_.sib_head, input_dim_, config_.sib_dim, rng);
    init_projection(params_.sib_sib, input_dim_, config_.sib_dim, rng);
    init_projection(params_.sib_mod, input_dim_, config_.sib_dim, rng);
    params_.sib = TriaffineParams::zeros(config_.sib_dim);
  }
  if (vocab_.num_labels() > 0) {
    init_projection(params_.label_head, input_dim_, config_.label_dim, rng);
    init_projection(params_.label_mod, input_dim_, config_.label_dim, rng);
    params_.label = LabelParams::zeros(vocab_.num_labels(), config_.label_dim);
  }
}

ModelParams Model::zero_grads() const {
  ModelParams g = params_;
  g.set_zero();
  return g;
}

ForwardState Model::forward(std::span<const int> word_ids) const {
  const int n = static_cast<int>(word_ids.size());
  if (n < 1) throw std::invalid_argument("forward: empty sentence");
  ForwardState st;
  st.ids.reserve(n + 1);
  st.ids.push_back(Vocab::kRoot);
  for (int id : word_ids) {
    if (id < 0 || id >= vocab_.num_words()) {
      throw std::invalid_argument("forward: word id outside vocabulary");
    }
    st.ids.push_back(id);
  }

  const int wd = config_.word_dim;
  st.input = Mat::Zero(n + 1, input_dim_);
  for (int i = 0; i <= n; ++i) {
    const int prev = i == 0 ? Vocab::kBos : st.ids[i - 1];
    const int next = i == n ? Vocab::kEos : st.ids[i + 1];
    st.input.block(i, 0, 1, wd) = params_.word_emb.row(prev);
    st.input.block(i, wd, 1, wd) = params_.word_emb.row(st.ids[i]);
    st.input.block(i, 2 * wd, 1, wd) = params_.word_emb.row(next);
    st.input.block(i, 3 * wd, 1, config_.pos_dim) =
        params_.pos_emb.row(std::min(i, config_.max_position - 1));
  }

  st.reps.arc_head = params_.arc_head.forward(st.input);
  st.reps.arc_mod = params_.arc_mod.forward(st.input);
  st.arcs = biaffine_score(st.reps, params_.arc);
  if (has_sib(config_)) {
    st.reps.sib_head = params_.sib_head.forward(st.input);
    st.reps.sib_sib = params_.sib_sib.forward(st.input);
    st.reps.sib_mod = params_.sib_mod.forward(st.input);
    st.sibs = triaffine_score(st.reps, params_.sib);
  }
  if (vocab_.num_labels() > 0) {
    st.reps.label_head = params_.label_head.forward(st.input);
    st.reps.label_mod = params_.label_mod.forward(st.input);
    st.labels = label_score(st.reps.label_head, st.reps.label_mod,
                            params_.label);
  }
  st.ready = true;
  return st;
}

void Model::backward(const ForwardState& st, std::span<const double> arc_grad,
                     std::span<const double> sib_grad,
                     std::span<const double> label_grad,
                     ModelParams& grads) const {
  if (!st.ready) {
    throw std::logic_error("backward: no forward state recorded");
  }
  const int n = st.length();
  Mat d_input = Mat::Zero(n + 1, input_dim_);

  Mat dh = Mat::Zero(n + 1, config_.arc_dim);
  Mat dm = Mat::Zero(n + 1, config_.arc_dim);
  biaffine_backward(st.reps.arc_head, st.reps.arc_mod, params_.arc, arc_grad,
                    grads.arc, dh, dm);
  d_input += params_.arc_head.backward(st.input, st.reps.arc_head, dh,
                                       grads.arc_head);
  d_input += params_.arc_mod.backward(st.input, st.reps.arc_mod, dm,
                                      grads.arc_mod);

  if (has_sib(config_) && !sib_grad.empty()) {
    Mat dsh = Mat::Zero(n + 1, config_.sib_dim);
    Mat dss = Mat::Zero(n + 1, config_.sib_dim);
    Mat dsm = Mat::Zero(n + 1, config_.sib_dim);
    triaffine_backward(st.reps.sib_head, st.reps.sib_sib, st.reps.sib_mod,
                       params_.sib, sib_grad, grads.sib, dsh, dss, dsm);
    d_input += params_.sib_head.backward(st.input, st.reps.sib_head, dsh,
                                         grads.sib_head);
    d_input += params_.sib_sib.backward(st.input, st.reps.sib_sib, dss,
                                        grads.sib_sib);
    d_input += params_.sib_mod.backward(st.input, st.reps.sib_mod, dsm,
                                        grads.sib_mod);
  }

  if (vocab_.num_labels() > 0 && !label_grad.empty()) {
    Mat dlh = Mat::Zero(n + 1, config_.label_dim);
    Mat dlm = Mat::Zero(n + 1, config_.label_dim);
    label_backward(st.reps.label_head, st.reps.label_mod, params_.label,
                   label_grad, grads.label, dlh, dlm);
    d_input += params_.label_head.backward(st.input, st.reps.label_head, dlh,
                                           grads.label_head);
    d_input += params_.label_mod.backward(st.input, st.reps.label_mod, dlm,
                                          grads.label_mod);
  }

  const int wd = config_.word_dim;
  for (int i = 0; i <= n; ++i) {
    const int prev = i == 0 ? Vocab::kBos : st.ids[i - 1];
    const int next = i == n ? Vocab::kEos : st.ids[i + 1];
    grads.word_emb.row(prev) += d_input.block(i, 0, 1, wd);
    grads.word_emb.row(st.ids[i]) += d_input.block(i, wd, 1, wd);
    grads.word_emb.row(next) += d_input.block(i, 2 * wd, 1, wd);
    grads.pos_emb.row(std::min(i, config_.max_position - 1)) +=
        d_input.block(i, 3 * wd, 1, config_.pos_dim);
  }
}

Marginals Model::marginals(const ForwardState& st) const {
  if (config_.mode == ModelMode::kLocal) {
    throw std::invalid_argument("marginals require a crf or crf2o model");
  }
  return treecrf::marginals(st.arcs, has_sib(config_) ? &st.sibs : nullptr,
                            inference_options());
}

Prediction Model::predict(const ForwardState& st, DecodeMode mode) const {
  const bool local = config_.mode == ModelMode::kLocal;
  if (local && mode == DecodeMode::kMbr) {
    throw std::invalid_argument("mbr decoding requires a crf or crf2o model");
  }
  Prediction out;
  auto viterbi = [&] {
    return has_sib(config_) ? eisner2(st.arcs, st.sibs, config_.root).tree
                            : eisner1(st.arcs, config_.root).tree;
  };
  switch (mode) {
    case DecodeMode::kViterbi:
      out.tree = viterbi();
      break;
    case DecodeMode::kMbr:
      out.tree = mbr_decode(marginals(st), config_.root).tree;
      break;
    case DecodeMode::kGreedy:
      if (local) {
        auto fast = greedy_fast_path(st.arcs, config_.root);
        out.used_fast_path = fast.has_value();
        out.tree = fast ? *fast : viterbi();
      } else {
        const Marginals m = marginals(st);
        auto fast = greedy_fast_path(m.arc_matrix(), config_.root);
        out.used_fast_path = fast.has_value();
        out.tree = fast ? *fast : mbr_decode(m, config_.root).tree;
      }
      break;
  }
  if (vocab_.num_labels() > 0) {
    out.tree.labels.resize(out.tree.n());
    for (int j = 1; j <= out.tree.n(); ++j) {
      out.tree.labels[j - 1] = st.labels.argmax(out.tree.head(j), j);
    }
  }
  return out;
}

void Model::save(std::ostream& out) const {
  Checkpoint ckpt;
  ckpt.meta["mode"] = to_string(config_.mode);
  ckpt.meta["root"] = to_string(config_.root);
  ckpt.meta["word_dim"] = std::to_string(config_.word_dim);
  ckpt.meta["pos_dim"] = std::to_string(config_.pos_dim);
  ckpt.meta["max_position"] = std::to_string(config_.max_position);
  ckpt.meta["arc_dim"] = std::to_string(config_.arc_dim);
  ckpt.meta["sib_dim"] = std::to_string(config_.sib_dim);
  ckpt.meta["label_dim"] = std::to_string(config_.label_dim);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", config_.label_weight);
  ckpt.meta["label_weight"] = buf;
  ckpt.lists["words"] = vocab_.words();
  ckpt.lists["labels"] = vocab_.labels();
  auto named = const_cast<ModelParams&>(params_).named(config_);
  write_checkpoint(out, ckpt, named);
}

Model Model::load(std::istream& in) {
  const Checkpoint ckpt = read_checkpoint(in);
  auto meta = [&](const char* key) -> const std::string& {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) {
      throw std::runtime_error(std::string("checkpoint: missing meta ") + key);
    }
    return it->second;
  };
  auto list = [&](const char* key) {
    auto it = ckpt.lists.find(key);
    return it == ckpt.lists.end() ? std::vector<std::string>{} : it->second;
  };
  ModelConfig config;
  config.mode = model_mode_from_string(meta("mode"));
  config.root = root_policy_from_string(meta("root"));
  config.word_dim = std::stoi(meta("word_dim"));
  config.pos_dim = std::stoi(meta("pos_dim"));
  config.max_position = std::stoi(meta("max_position"));
  config.arc_dim = std::stoi(meta("arc_dim"));
  config.sib_dim = std::stoi(meta("sib_dim"));
  config.label_dim = std::stoi(meta("label_dim"));
  config.label_weight = std::stod(meta("label_weight"));
  Model model(config, Vocab(list("words"), list("labels")), 0);
  load_params(ckpt, model.named_params());
  return model;
}

}  // namespace treecrf
