// treecrf command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI/CLI11.hpp>

#include "treecrf/conll.hpp"
#include "treecrf/metrics.hpp"
#include "treecrf/oracle_check.hpp"
#include "treecrf/toy_treebank.hpp"
#include "treecrf/trainer.hpp"
#include "treecrf/tree.hpp"

namespace {

using namespace treecrf;

constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string dialect = "conllu";
  ConllDialect parsed() const { return conll_dialect_from_string(dialect); }
};

// Writes to the named file, or stdout for "-" / empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Failure("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure("cannot open " + path);
  return Model::load(in);
}

struct TrainArgs {
  Common io;
  std::string train, dev, model_path, log_path;
  std::string mode = "crf", root = "single", decode = "viterbi";
  ModelConfig cfg;
  double lr = 0.05;
  double momentum = 0.9;
  double clip = 5.0;
  int max_epochs = 1000;
  int patience = 100;
  int batch_size = 8;
  std::uint64_t seed = 1;
  bool stop_when_perfect = false;
};

int run_train(const TrainArgs& a) {
  TrainOptions opts;
  opts.model = a.cfg;
  opts.model.mode = model_mode_from_string(a.mode);
  opts.model.root = root_policy_from_string(a.root);
  opts.decode = decode_mode_from_string(a.decode);
  opts.sgd = {a.lr, a.momentum, a.clip};
  opts.max_epochs = a.max_epochs;
  opts.patience = a.patience;
  opts.batch_size = a.batch_size;
  opts.seed = a.seed;
  opts.stop_when_perfect = a.stop_when_perfect;

  const auto train = read_conll_file(a.train, a.io.parsed());
  const auto dev = a.dev.empty() ? train : read_conll_file(a.dev, a.io.parsed());
  std::unique_ptr<std::ofstream> log_file;
  std::ostream* log = &std::cerr;
  if (!a.log_path.empty()) {
    log_file = std::make_unique<std::ofstream>(a.log_path);
    if (!*log_file) throw Failure("cannot write " + a.log_path);
    log = log_file.get();
  }
  const TrainResult r = train_model(opts, train, dev, log);
  std::ofstream out(a.model_path);
  if (!out) throw Failure("cannot write " + a.model_path);
  r.model.save(out);
  const Metrics& best = r.epochs[r.best_epoch - 1].dev;
  std::fprintf(stderr, "best epoch %d dev UAS %.2f LAS %.2f (%zu epochs, %d skipped)\n",
               r.best_epoch, best.uas(), best.las(), r.epochs.size(), r.skipped);
  return 0;
}

struct ParseArgs {
  Common io;
  std::string model_path, input, output, decode = "viterbi";
};

int run_parse(const ParseArgs& a) {
  const Model model = load_model(a.model_path);
  const auto input = read_conll_file(a.input, a.io.parsed());
  ParseStats stats;
  const DecodeMode mode = decode_mode_from_string(a.decode);
  const auto parsed = parse_sentences(model, input, mode, &stats);
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    const DepTree t = parsed[k].tree();
    if (!is_legal_tree(t.heads, model.config().root) || !is_projective(t)) {
      throw Failure("decoder produced an invalid tree for sentence " +
                    std::to_string(k + 1));
    }
  }
  Output out(a.output);
  write_conll(out.stream(), parsed);
  std::fprintf(stderr, "parsed %ld sentences", stats.sentences);
  if (mode == DecodeMode::kGreedy) {
    std::fprintf(stderr, "; fast path hit rate %.2f%% (%ld/%ld)",
                 stats.hit_rate(), stats.fast_path_hits, stats.sentences);
  }
  std::fprintf(stderr, "\n");
  return 0;
}

struct EvalArgs {
  Common io;
  std::string pred, gold, punct;
  bool no_punct = false;
  bool sib = false;
};

int run_eval(const EvalArgs& a) {
  const auto pred = read_conll_file(a.pred, a.io.parsed());
  const auto gold = read_conll_file(a.gold, a.io.parsed());
  PunctPolicy punct = a.no_punct ? PunctPolicy::none() : PunctPolicy::defaults();
  if (!a.punct.empty()) {
    punct = PunctPolicy::none();
    std::stringstream ss(a.punct);
    for (std::string tag; std::getline(ss, tag, ',');) {
      if (!tag.empty()) punct.tags.insert(tag);
    }
  }
  const Metrics m = evaluate(pred, gold, punct);
  std::cout << m.key_values();
  if (a.sib) {
    std::vector<DepTree> p, g;
    for (std::size_t k = 0; k < gold.size(); ++k) {
      p.push_back(pred[k].tree());
      g.push_back(gold[k].tree());
    }
    const Prf prf = sib_prf(p, g);
    std::printf("SIB_P=%.2f\nSIB_R=%.2f\nSIB_F=%.2f\n", prf.precision,
                prf.recall, prf.f1);
  }
  std::cerr << m.table();
  return 0;
}

struct MarginalArgs {
  Common io;
  std::string model_path, input, output;
  bool sib = false;
};

int run_marginals(const MarginalArgs& a) {
  const Model model = load_model(a.model_path);
  if (model.config().mode == ModelMode::kLocal) {
    throw Failure("marginals require a crf or crf2o model");
  }
  if (a.sib && model.config().mode != ModelMode::kCrf2o) {
    throw Failure("--sib requires a crf2o model");
  }
  const auto input = read_conll_file(a.input, a.io.parsed());
  Output out(a.output);
  write_marginals(model, input, out.stream(), a.sib);
  return 0;
}

int run_oracle(const OracleOptions& opts) {
  const OracleReport r = run_oracle_check(opts, &std::cout);
  std::printf("%ld checks, %zu failures\n", r.checks, r.failures.size());
  std::printf("%s\n", r.ok() ? "oracle check passed" : "oracle check FAILED");
  return r.ok() ? 0 : kExitValidation;
}

struct ToyArgs {
  int count = 50;
  std::uint64_t seed = 1;
  double keep = 1.0;
  std::string output;
};

int run_toy(const ToyArgs& a) {
  auto sentences = make_toy_treebank(a.count, a.seed);
  if (a.keep < 1.0) sentences = mask_heads(sentences, a.keep, a.seed + 1);
  Output out(a.output);
  write_conll(out.stream(), sentences);
  return 0;
}

void add_dialect(CLI::App* cmd, Common& io) {
  cmd->add_option("--dialect", io.dialect, "conllx or conllu")
      ->check(CLI::IsMember({"conllx", "conll", "conllu"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projective dependency parsing with first- and second-order TreeCRF"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model on a CoNLL file");
  add_dialect(train, ta.io);
  train->add_option("--train", ta.train, "training treebank")->required()->check(CLI::ExistingFile);
  train->add_option("--dev", ta.dev, "development treebank (default: training set)")
      ->check(CLI::ExistingFile);
  train->add_option("-m,--model", ta.model_path, "checkpoint to write")->required();
  train->add_option("--log", ta.log_path, "per-epoch log file (default: stderr)");
  train->add_option("--mode", ta.mode, "loc, crf or crf2o")
      ->check(CLI::IsMember({"loc", "crf", "crf2o"}))->capture_default_str();
  train->add_option("--root", ta.root, "single or multi")
      ->check(CLI::IsMember({"single", "multi"}))->capture_default_str();
  train->add_option("--decode", ta.decode, "decoder for dev evaluation")
      ->check(CLI::IsMember({"viterbi", "mbr", "greedy"}))->capture_default_str();
  train->add_option("--word-dim", ta.cfg.word_dim)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--pos-dim", ta.cfg.pos_dim)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--max-position", ta.cfg.max_position)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--arc-dim", ta.cfg.arc_dim)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--sib-dim", ta.cfg.sib_dim)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--label-dim", ta.cfg.label_dim)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--label-weight", ta.cfg.label_weight)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--lr", ta.lr)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--momentum", ta.momentum)->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  train->add_option("--clip", ta.clip, "gradient norm limit, 0 to disable")->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--max-epochs", ta.max_epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--patience", ta.patience)->check(CLI::NonNegativeNumber)->capture_default_str();
  train->add_option("--batch-size", ta.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--seed", ta.seed)->envname("TREECRF_SEED")->capture_default_str();
  train->add_flag("--stop-when-perfect", ta.stop_when_perfect,
                  "stop once dev UAS reaches 100");

  ParseArgs pa;
  auto* parse = app.add_subcommand("parse", "parse a CoNLL file with a trained model");
  add_dialect(parse, pa.io);
  parse->add_option("-m,--model", pa.model_path)->required()->check(CLI::ExistingFile);
  parse->add_option("-i,--input", pa.input)->required()->check(CLI::ExistingFile);
  parse->add_option("-o,--output", pa.output, "output file (default: stdout)");
  parse->add_option("--decode", pa.decode, "viterbi, mbr or greedy (falls back to full decoding)")
      ->check(CLI::IsMember({"viterbi", "mbr", "greedy"}))->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score predictions against a gold file");
  add_dialect(eval, ea.io);
  eval->add_option("--pred", ea.pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", ea.gold)->required()->check(CLI::ExistingFile);
  eval->add_option("--punct", ea.punct, "comma-separated POS tags to skip");
  eval->add_flag("--no-punct", ea.no_punct, "score punctuation too");
  eval->add_flag("--sib", ea.sib, "also report adjacent-sibling P/R/F");

  MarginalArgs ma;
  auto* marg = app.add_subcommand("marginals", "dump arc marginals in score-file format");
  add_dialect(marg, ma.io);
  marg->add_option("-m,--model", ma.model_path)->required()->check(CLI::ExistingFile);
  marg->add_option("-i,--input", ma.input)->required()->check(CLI::ExistingFile);
  marg->add_option("-o,--output", ma.output, "output file (default: stdout)");
  marg->add_flag("--sib", ma.sib, "include sibling marginals (crf2o)");

  OracleOptions oa;
  auto* oracle = app.add_subcommand("oracle-check", "compare inference against brute-force enumeration");
  oracle->add_option("--instances", oa.instances, "random instances per length and root policy")
      ->check(CLI::PositiveNumber)->capture_default_str();
  oracle->add_option("--max-n", oa.max_n)->check(CLI::Range(1, 6))->capture_default_str();
  oracle->add_option("--seed", oa.seed)->envname("TREECRF_SEED")->capture_default_str();
  oracle->add_flag("--inject-fault", oa.inject_fault, "perturb one engine score to exercise failure reporting");

  ToyArgs toy_args;
  auto* toy = app.add_subcommand("toy-treebank", "write a generated toy treebank");
  toy->add_option("--count", toy_args.count)->check(CLI::NonNegativeNumber)->capture_default_str();
  toy->add_option("--seed", toy_args.seed)->envname("TREECRF_SEED")->capture_default_str();
  toy->add_option("--keep", toy_args.keep, "fraction of heads kept")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  toy->add_option("-o,--output", toy_args.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) return run_train(ta);
    if (*parse) return run_parse(pa);
    if (*eval) return run_eval(ea);
    if (*marg) return run_marginals(ma);
    if (*oracle) return run_oracle(oa);
    if (*toy) return run_toy(toy_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
