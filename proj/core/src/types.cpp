#include "treecrf/types.hpp"

#include <cmath>
#include <string>

namespace treecrf {

const char* to_string(RootPolicy policy) {
  return policy == RootPolicy::kSingle ? "single" : "multi";
}

RootPolicy root_policy_from_string(const std::string& name) {
  if (name == "single") return RootPolicy::kSingle;
  if (name == "multi") return RootPolicy::kMulti;
  throw std::invalid_argument("unknown root policy: " + name);
}

int PartialTree::num_annotated() const {
  int count = 0;
  for (int h : heads) count += (h != kUnknownHead);
  return count;
}

bool PartialTree::consistent() const {
  const int len = n();
  for (int j = 1; j <= len; ++j) {
    const int h = heads[j - 1];
    if (h == kUnknownHead) continue;
    if (h < 0 || h > len || h == j) return false;
  }
  // Annotated arcs form a forest iff following annotated heads from any
  // word terminates at the root or at an unannotated word.
  std::vector<int> state(len + 1, 0);  // 0 new, 1 on stack, 2 done
  for (int start = 1; start <= len; ++start) {
    int v = start;
    std::vector<int> path;
    while (v != 0 && state[v] == 0 && heads[v - 1] != kUnknownHead) {
      state[v] = 1;
      path.push_back(v);
      v = heads[v - 1];
    }
    if (v != 0 && state[v] == 1) return false;
    for (int u : path) state[u] = 2;
  }
  return true;
}

ArcScores::ArcScores(int n) : n_(n), values_((n + 1) * (n + 1), 0.0) {
  if (n < 0) throw std::invalid_argument("ArcScores: negative length");
  for (int i = 0; i <= n; ++i) {
    at(i, 0) = kNegInf;
    at(i, i) = kNegInf;
  }
}

ArcScores::ArcScores(int n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (n < 0 || values_.size() != static_cast<std::size_t>((n + 1) * (n + 1))) {
    throw std::invalid_argument("ArcScores: value count does not match n");
  }
  for (int i = 0; i <= n; ++i) {
    at(i, 0) = kNegInf;
    at(i, i) = kNegInf;
  }
}

void ArcScores::check_finite() const {
  for (int i = 0; i <= n_; ++i) {
    for (int j = 1; j <= n_; ++j) {
      if (i != j && !std::isfinite(at(i, j))) {
        throw std::invalid_argument("ArcScores: non-finite score at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

SibScores::SibScores(int n)
    : n_(n), values_(static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1), 0.0) {
  if (n < 0) throw std::invalid_argument("SibScores: negative length");
}

void SibScores::check_finite() const {
  for (int i = 0; i <= n_; ++i) {
    for (int k = 1; k <= n_; ++k) {
      for (int j = 1; j <= n_; ++j) {
        if (valid(i, k, j) && !std::isfinite(at(i, k, j))) {
          throw std::invalid_argument("SibScores: non-finite score");
        }
      }
    }
  }
}

LabelScores::LabelScores(int n, int num_labels)
    : n_(n),
      num_labels_(num_labels),
      values_(static_cast<std::size_t>(n + 1) * (n + 1) * num_labels, 0.0) {
  if (n < 0 || num_labels < 0) {
    throw std::invalid_argument("LabelScores: negative dimension");
  }
}

int LabelScores::argmax(int head, int mod) const {
  int best = 0;
  for (int l = 1; l < num_labels_; ++l) {
    if (at(head, mod, l) > at(head, mod, best)) best = l;
  }
  return best;
}

}  // namespace treecrf
