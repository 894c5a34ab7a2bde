#include "treecrf/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <stdexcept>

#include "treecrf/tree.hpp"

namespace treecrf {

namespace {

double percent(long num, long den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / den;
}

struct Scorer {
  Metrics m;

  template <class HeadEq, class LabelEq, class Skip>
  void sentence(int n, HeadEq head_ok, LabelEq label_ok, Skip skip) {
    long scored = 0;
    bool all_heads = true;
    bool all_labels = true;
    for (int j = 1; j <= n; ++j) {
      if (skip(j)) continue;
      ++scored;
      const bool h = head_ok(j);
      const bool l = h && label_ok(j);
      m.head_correct += h;
      m.label_correct += l;
      all_heads = all_heads && h;
      all_labels = all_labels && l;
    }
    m.tokens += scored;
    if (scored > 0) {
      ++m.sentences;
      m.complete_unlabeled += all_heads;
      m.complete_labeled += all_labels;
    }
  }
};

}  // namespace

PunctPolicy PunctPolicy::defaults() {
  return {{"PUNCT", "``", "''", ",", ".", ":", "-LRB-", "-RRB-", "#", "$"}};
}

bool PunctPolicy::is_punct(const ConllSentence& s, int j) const {
  if (tags.empty()) return false;
  const ConllRow& row = s.word(j);
  return tags.count(row[conll_col::kCpos]) > 0 ||
         tags.count(row[conll_col::kPos]) > 0;
}

double Metrics::uas() const { return percent(head_correct, tokens); }
double Metrics::las() const { return percent(label_correct, tokens); }
double Metrics::ucm() const { return percent(complete_unlabeled, sentences); }
double Metrics::lcm() const { return percent(complete_labeled, sentences); }

std::string Metrics::key_values() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "UAS=%.2f\nLAS=%.2f\nUCM=%.2f\nLCM=%.2f\ntokens=%ld\n"
                "sentences=%ld\n",
                uas(), las(), ucm(), lcm(), tokens, sentences);
  return buf;
}

std::string Metrics::table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "  metric    correct      total        %%\n"
                "  UAS    %10ld %10ld %8.2f\n"
                "  LAS    %10ld %10ld %8.2f\n"
                "  UCM    %10ld %10ld %8.2f\n"
                "  LCM    %10ld %10ld %8.2f\n",
                head_correct, tokens, uas(), label_correct, tokens, las(),
                complete_unlabeled, sentences, ucm(), complete_labeled,
                sentences, lcm());
  return buf;
}

Metrics evaluate(std::span<const DepTree> pred, std::span<const DepTree> gold,
                 std::span<const std::vector<bool>> skip) {
  if (pred.size() != gold.size() || (!skip.empty() && skip.size() != gold.size())) {
    throw std::invalid_argument("evaluate: sentence count mismatch");
  }
  Scorer s;
  for (std::size_t b = 0; b < gold.size(); ++b) {
    const DepTree& p = pred[b];
    const DepTree& g = gold[b];
    if (p.n() != g.n() || (!skip.empty() && static_cast<int>(skip[b].size()) != g.n())) {
      throw std::invalid_argument("evaluate: sentence length mismatch");
    }
    s.sentence(
        g.n(), [&](int j) { return p.head(j) == g.head(j); },
        [&](int j) {
          if (!g.has_labels()) return true;
          return p.has_labels() && p.labels[j - 1] == g.labels[j - 1];
        },
        [&](int j) {
          return g.head(j) == kUnknownHead || (!skip.empty() && skip[b][j - 1]);
        });
  }
  return s.m;
}

Metrics evaluate(std::span<const ConllSentence> pred,
                 std::span<const ConllSentence> gold, const PunctPolicy& punct) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("evaluate: sentence count mismatch");
  }
  Scorer s;
  for (std::size_t b = 0; b < gold.size(); ++b) {
    const ConllSentence& p = pred[b];
    const ConllSentence& g = gold[b];
    if (p.n() != g.n()) {
      throw std::invalid_argument("evaluate: length mismatch in sentence " +
                                  std::to_string(b + 1));
    }
    s.sentence(
        g.n(), [&](int j) { return p.head(j) == g.head(j); },
        [&](int j) { return p.deprel(j) == g.deprel(j); },
        [&](int j) {
          return g.head(j) == kUnknownHead || punct.is_punct(g, j);
        });
  }
  return s.m;
}

Prf sib_prf(std::span<const DepTree> pred, std::span<const DepTree> gold) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("sib_prf: sentence count mismatch");
  }
  long n_pred = 0;
  long n_gold = 0;
  long n_match = 0;
  for (std::size_t b = 0; b < gold.size(); ++b) {
    for (int h : gold[b].heads) {
      if (h == kUnknownHead) {
        throw std::invalid_argument("sib_prf: gold tree is partially annotated");
      }
    }
    if (pred[b].n() != gold[b].n()) {
      throw std::invalid_argument("sib_prf: sentence length mismatch");
    }
    const auto p = extract_sib_triples(pred[b]);
    const auto g = extract_sib_triples(gold[b]);
    std::vector<SibTriple> common;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(),
                          std::back_inserter(common));
    n_pred += static_cast<long>(p.size());
    n_gold += static_cast<long>(g.size());
    n_match += static_cast<long>(common.size());
  }
  if (n_pred == 0 && n_gold == 0) return {100.0, 100.0, 100.0};
  Prf r;
  r.precision = percent(n_match, n_pred);
  r.recall = percent(n_match, n_gold);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

}  // namespace treecrf
