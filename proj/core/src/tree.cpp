#include "treecrf/tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace treecrf {

namespace {

bool arcs_cross(int h1, int m1, int h2, int m2) {
  const int a = std::min(h1, m1), b = std::max(h1, m1);
  const int c = std::min(h2, m2), d = std::max(h2, m2);
  return (a < c && c < b && b < d) || (c < a && a < d && d < b);
}

void require_tree(std::span<const int> heads) {
  if (!is_legal_tree(heads, RootPolicy::kMulti)) {
    throw std::invalid_argument("illegal dependency tree");
  }
}

}  // namespace

bool is_legal_tree(std::span<const int> heads, RootPolicy policy) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int j = 1; j <= n; ++j) {
    const int h = heads[j - 1];
    if (h < 0 || h > n || h == j) return false;
    roots += (h == 0);
  }
  if (n > 0 && roots == 0) return false;
  if (policy == RootPolicy::kSingle && roots != 1 && n > 0) return false;

  // Every vertex is visited at most twice: once when pushed on a walk and
  // once when the walk is resolved.
  std::vector<char> state(n + 1, 0);  // 0 unvisited, 1 on current walk, 2 ok
  state[0] = 2;
  std::vector<int> walk;
  for (int start = 1; start <= n; ++start) {
    int v = start;
    walk.clear();
    while (state[v] == 0) {
      state[v] = 1;
      walk.push_back(v);
      v = heads[v - 1];
    }
    if (state[v] == 1) return false;
    for (int u : walk) state[u] = 2;
  }
  return true;
}

bool is_projective(const DepTree& tree) {
  require_tree(tree.heads);
  const int n = tree.n();
  for (int m1 = 1; m1 <= n; ++m1) {
    for (int m2 = m1 + 1; m2 <= n; ++m2) {
      if (arcs_cross(tree.head(m1), m1, tree.head(m2), m2)) return false;
    }
  }
  return true;
}

std::vector<SibTriple> extract_sib_triples(const DepTree& tree) {
  require_tree(tree.heads);
  const int n = tree.n();
  std::vector<std::vector<int>> children(n + 1);
  for (int j = 1; j <= n; ++j) children[tree.head(j)].push_back(j);

  std::vector<SibTriple> triples;
  for (int i = 0; i <= n; ++i) {
    const auto& kids = children[i];  // ascending
    // Right side: inner sibling is the one closer to the head.
    for (std::size_t a = 0; a + 1 < kids.size(); ++a) {
      if (kids[a] > i) triples.push_back({i, kids[a], kids[a + 1]});
    }
    // Left side, walking outward from the head.
    for (std::size_t a = kids.size(); a-- > 1;) {
      if (kids[a] < i) triples.push_back({i, kids[a], kids[a - 1]});
    }
  }
  std::sort(triples.begin(), triples.end());
  return triples;
}

double tree_score(const ArcScores& arcs, const SibScores* sibs,
                  const DepTree& tree) {
  if (arcs.n() != tree.n() || (sibs != nullptr && sibs->n() != tree.n())) {
    throw std::invalid_argument("tree_score: dimension mismatch");
  }
  require_tree(tree.heads);
  double total = 0.0;
  for (int j = 1; j <= tree.n(); ++j) total += arcs(tree.head(j), j);
  if (sibs != nullptr) {
    for (const SibTriple& t : extract_sib_triples(tree)) {
      total += (*sibs)(t.head, t.sib, t.mod);
    }
  }
  return total;
}

std::vector<DepTree> enumerate_projective_trees(int n, RootPolicy policy) {
  if (n < 1) throw std::invalid_argument("enumerate: n must be positive");
  if (n > kMaxEnumerationLength) {
    throw std::invalid_argument("enumerate: n=" + std::to_string(n) +
                                " exceeds the enumeration guard");
  }
  // Backtracking over head assignments for words 1..n, pruning any partial
  // assignment whose arcs already cross or close a cycle; the surviving
  // full assignments are then filtered by the legality predicate.
  std::vector<DepTree> out;
  std::vector<int> heads(n, 0);

  auto creates_cycle = [&](int j) {
    int v = heads[j - 1];
    for (int steps = 0; steps <= n; ++steps) {
      if (v == 0 || v > j) return false;  // reached root or unassigned word
      if (v == j) return true;
      v = heads[v - 1];
    }
    return true;
  };

  auto recurse = [&](auto&& self, int j) -> void {
    if (j > n) {
      if (is_legal_tree(heads, policy)) out.emplace_back(heads);
      return;
    }
    for (int h = 0; h <= n; ++h) {
      if (h == j) continue;
      heads[j - 1] = h;
      bool ok = !creates_cycle(j);
      for (int m = 1; ok && m < j; ++m) {
        if (arcs_cross(heads[m - 1], m, h, j)) ok = false;
      }
      if (ok) self(self, j + 1);
    }
    heads[j - 1] = 0;
  };
  recurse(recurse, 1);
  return out;
}

}  // namespace treecrf
