#pragma once

// Core value types shared by every treecrf module.
//
// Positions follow the usual dependency convention: index 0 is the
// pseudo-root, words occupy 1..n, and a head array is indexed by
// modifier-1.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace treecrf {

// Finite stand-in for negative infinity in public score containers.
inline constexpr double kNegInf = std::numeric_limits<double>::lowest() / 2;

// Head value of an unannotated word in a PartialTree.
inline constexpr int kUnknownHead = -1;

inline bool is_neg_inf(double v) { return v <= kNegInf; }

enum class RootPolicy {
  kSingle,  // exactly one word attaches to the pseudo-root
  kMulti,   // any number of words may attach to the pseudo-root
};

const char* to_string(RootPolicy policy);
RootPolicy root_policy_from_string(const std::string& name);

struct DepTree {
  std::vector<int> heads;   // heads[j-1] in [0, n]
  std::vector<int> labels;  // empty, or one label id per word

  DepTree() = default;
  explicit DepTree(std::vector<int> h) : heads(std::move(h)) {}
  DepTree(std::vector<int> h, std::vector<int> l)
      : heads(std::move(h)), labels(std::move(l)) {}

  int n() const { return static_cast<int>(heads.size()); }
  int head(int j) const { return heads[j - 1]; }
  bool has_labels() const { return !labels.empty(); }

  friend bool operator==(const DepTree&, const DepTree&) = default;
};

struct PartialTree {
  std::vector<int> heads;  // heads[j-1] in [0, n] or kUnknownHead

  PartialTree() = default;
  explicit PartialTree(std::vector<int> h) : heads(std::move(h)) {}

  static PartialTree empty(int n) {
    return PartialTree(std::vector<int>(n, kUnknownHead));
  }
  static PartialTree from_tree(const DepTree& tree) {
    return PartialTree(tree.heads);
  }

  int n() const { return static_cast<int>(heads.size()); }
  int head(int j) const { return heads[j - 1]; }
  bool annotated(int j) const { return heads[j - 1] != kUnknownHead; }
  int num_annotated() const;
  bool complete() const { return num_annotated() == n(); }
  // Only meaningful when complete().
  DepTree to_tree() const { return DepTree(heads); }

  // True when every annotated head is in range and the annotated arcs
  // contain no cycle.
  bool consistent() const;
};

// Dense (n+1)x(n+1) matrix of first-order scores; entry (i, j) scores the
// arc i -> j. Column 0 and the diagonal hold kNegInf.
class ArcScores {
 public:
  ArcScores() = default;
  explicit ArcScores(int n);
  ArcScores(int n, std::vector<double> values);

  int n() const { return n_; }
  int stride() const { return n_ + 1; }

  double& at(int head, int mod) { return values_[head * (n_ + 1) + mod]; }
  double at(int head, int mod) const { return values_[head * (n_ + 1) + mod]; }
  double operator()(int head, int mod) const { return at(head, mod); }

  static bool valid(int head, int mod) { return mod >= 1 && head != mod; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Throws std::invalid_argument if a valid entry is not finite.
  void check_finite() const;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

// Dense (n+1)^3 tensor of adjacent-sibling scores; entry (i, k, j) scores
// head i taking consecutive same-side modifiers k then j (i<k<j or j<k<i).
// Entries outside that region are zero and ignored.
class SibScores {
 public:
  SibScores() = default;
  explicit SibScores(int n);

  int n() const { return n_; }
  int stride() const { return n_ + 1; }

  double& at(int head, int sib, int mod) {
    return values_[(head * (n_ + 1) + sib) * (n_ + 1) + mod];
  }
  double at(int head, int sib, int mod) const {
    return values_[(head * (n_ + 1) + sib) * (n_ + 1) + mod];
  }
  double operator()(int head, int sib, int mod) const {
    return at(head, sib, mod);
  }

  static bool valid(int head, int sib, int mod) {
    return mod >= 1 && sib >= 1 &&
           ((head < sib && sib < mod) || (mod < sib && sib < head));
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  void check_finite() const;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

// Per-arc label logits, laid out (head, mod, label).
class LabelScores {
 public:
  LabelScores() = default;
  LabelScores(int n, int num_labels);

  int n() const { return n_; }
  int num_labels() const { return num_labels_; }

  double& at(int head, int mod, int label) {
    return values_[(head * (n_ + 1) + mod) * num_labels_ + label];
  }
  double at(int head, int mod, int label) const {
    return values_[(head * (n_ + 1) + mod) * num_labels_ + label];
  }

  int argmax(int head, int mod) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  int n_ = 0;
  int num_labels_ = 0;
  std::vector<double> values_;
};

}  // namespace treecrf
