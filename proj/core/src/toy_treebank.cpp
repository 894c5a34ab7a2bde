#include "treecrf/toy_treebank.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <string>

namespace treecrf {

namespace {

const std::vector<std::string> kDet = {"the", "a", "every", "this"};
const std::vector<std::string> kAdj = {"big", "small", "red", "old", "quick"};
const std::vector<std::string> kNoun = {"dog",  "cat",       "man",
                                        "park", "telescope", "book",
                                        "river", "house"};
const std::vector<std::string> kVerb = {"saw", "liked", "found", "chased",
                                        "took"};
const std::vector<std::string> kVerbPrep = {"in", "with", "near"};
const std::vector<std::string> kAdv = {"quickly", "today", "again"};

struct Token {
  std::string form;
  std::string pos;
  int head = 0;
  std::string rel;
};

class Builder {
 public:
  explicit Builder(std::mt19937_64& rng) : rng_(rng) {}

  const std::string& pick(const std::vector<std::string>& words) {
    return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng_)];
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  int add(const std::string& form, const char* pos) {
    tokens.push_back({form, pos, 0, ""});
    return static_cast<int>(tokens.size());
  }
  void attach(int dep, int head, const char* rel) {
    tokens[dep - 1].head = head;
    tokens[dep - 1].rel = rel;
  }

  // Returns the noun heading the phrase. `depth` bounds "of" nesting.
  int noun_phrase(int depth) {
    std::vector<std::pair<int, const char*>> pre;
    if (coin(0.8)) pre.emplace_back(add(pick(kDet), "DET"), "det");
    const int adjs = std::uniform_int_distribution<int>(0, 2)(rng_);
    for (int k = 0; k < adjs; ++k) pre.emplace_back(add(pick(kAdj), "ADJ"), "amod");
    const int noun = add(pick(kNoun), "NOUN");
    for (auto [dep, rel] : pre) attach(dep, noun, rel);
    if (depth > 0 && coin(0.3)) {
      const int prep = add("of", "ADP");
      const int inner = noun_phrase(depth - 1);
      attach(prep, inner, "case");
      attach(inner, noun, "nmod");
    }
    return noun;
  }

  std::vector<Token> tokens;

 private:
  std::mt19937_64& rng_;
};

}  // namespace

std::vector<ConllSentence> make_toy_treebank(int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("toy treebank: negative count");
  std::mt19937_64 rng(seed);
  std::vector<ConllSentence> out;
  for (int s = 0; s < count; ++s) {
    Builder b(rng);
    int front_adv = 0;
    if (b.coin(0.2)) front_adv = b.add(b.pick(kAdv), "ADV");
    const int subj = b.noun_phrase(1);
    const int verb = b.add(b.pick(kVerb), "VERB");
    b.attach(verb, 0, "root");
    b.attach(subj, verb, "nsubj");
    if (front_adv) b.attach(front_adv, verb, "advmod");
    const int obj = b.noun_phrase(1);
    b.attach(obj, verb, "obj");
    if (b.coin(0.5)) {
      const int prep = b.add(b.pick(kVerbPrep), "ADP");
      const int noun = b.noun_phrase(0);
      b.attach(prep, noun, "case");
      b.attach(noun, verb, "obl");
    }
    if (!front_adv && b.coin(0.3)) b.attach(b.add(b.pick(kAdv), "ADV"), verb, "advmod");
    b.attach(b.add(".", "PUNCT"), verb, "punct");

    ConllSentence sent;
    sent.comments.push_back("# sent_id = toy-" + std::to_string(s + 1));
    for (std::size_t k = 0; k < b.tokens.size(); ++k) {
      const Token& t = b.tokens[k];
      sent.rows.push_back({std::to_string(k + 1), t.form, t.form, t.pos, t.pos,
                           "_", std::to_string(t.head), t.rel, "_", "_"});
    }
    sent.reindex(ConllDialect::kConllU);
    out.push_back(std::move(sent));
  }
  return out;
}

std::vector<ConllSentence> mask_heads(std::span<const ConllSentence> sentences,
                                      double keep, std::uint64_t seed) {
  if (keep < 0.0 || keep > 1.0) {
    throw std::invalid_argument("mask_heads: keep must be in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep_dist(keep);
  std::vector<ConllSentence> out(sentences.begin(), sentences.end());
  for (auto& s : out) {
    const int n = s.n();
    std::vector<int> heads(n);
    std::vector<std::string> labels(n);
    int kept = 0;
    for (int j = 1; j <= n; ++j) {
      const bool k = keep_dist(rng);
      heads[j - 1] = k ? s.head(j) : kUnknownHead;
      labels[j - 1] = k ? s.deprel(j) : "_";
      kept += k;
    }
    if (kept == 0) {
      const int j = std::uniform_int_distribution<int>(1, n)(rng);
      heads[j - 1] = s.head(j);
      labels[j - 1] = s.deprel(j);
    }
    s.set_heads(heads, labels);
  }
  return out;
}

}  // namespace treecrf
