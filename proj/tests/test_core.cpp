#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "oracle.hpp"
#include "treecrf/tree.hpp"

using namespace treecrf;
using treecrf::testing::random_arcs;
using treecrf::testing::random_sibs;

namespace {

const DepTree kTelescope({2, 0, 2, 2, 6, 4});

}  // namespace

TEST(TreeScore, SingleArc) {
  ArcScores a(1);
  a.at(0, 1) = 1.5;
  EXPECT_DOUBLE_EQ(tree_score(a, DepTree({0})), 1.5);
}

TEST(TreeScore, TelescopeTreeSiblingOnly) {
  ArcScores a = treecrf::testing::constant_arcs(6, 0.0);
  SibScores s(6);
  s.at(2, 3, 4) = 0.7;
  EXPECT_NEAR(tree_score(a, &s, kTelescope), 0.7, 1e-15);
}

TEST(TreeScore, MatchesIndependentSummation) {
  std::mt19937_64 rng(11);
  const ArcScores a = random_arcs(4, rng);
  const SibScores s = random_sibs(4, rng);
  for (const auto& t : enumerate_projective_trees(4)) {
    double want = 0.0;
    for (int j = 1; j <= 4; ++j) want += a(t.head(j), j);
    // Adjacent siblings straight from the head array.
    for (int h = 0; h <= 4; ++h) {
      for (int side : {-1, 1}) {
        std::vector<int> kids;
        for (int j = 1; j <= 4; ++j)
          if (t.head(j) == h && (j - h) * side > 0) kids.push_back(j);
        if (side < 0) std::reverse(kids.begin(), kids.end());
        for (std::size_t k = 1; k < kids.size(); ++k) want += s(h, kids[k - 1], kids[k]);
      }
    }
    EXPECT_NEAR(tree_score(a, &s, t), want, 1e-12);
  }
}

TEST(TreeScore, RejectsBadInput) {
  ArcScores a(2);
  EXPECT_THROW(tree_score(a, DepTree({0})), std::invalid_argument);
  EXPECT_THROW(tree_score(a, DepTree({2, 1})), std::invalid_argument);
}

TEST(SibTriples, Examples) {
  EXPECT_EQ(extract_sib_triples(kTelescope), (std::vector<SibTriple>{{2, 3, 4}}));
  EXPECT_TRUE(extract_sib_triples(DepTree({0, 1, 2})).empty());
  EXPECT_EQ(extract_sib_triples(DepTree({0, 1, 1, 1})),
            (std::vector<SibTriple>{{1, 2, 3}, {1, 3, 4}}));
  EXPECT_THROW(extract_sib_triples(DepTree({2, 1})), std::invalid_argument);
}

TEST(SibTriples, LeftSide) {
  // Word 4 heads 3, 2 and 1 on its left: inner sibling is the closer one.
  EXPECT_EQ(extract_sib_triples(DepTree({4, 4, 4, 0})),
            (std::vector<SibTriple>{{4, 2, 1}, {4, 3, 2}}));
}

TEST(LegalTree, Examples) {
  const std::vector<int> ok{0, 1};
  const std::vector<int> cycle{2, 1};
  const std::vector<int> two_roots{0, 0};
  EXPECT_TRUE(is_legal_tree(ok));
  EXPECT_FALSE(is_legal_tree(cycle));
  EXPECT_FALSE(is_legal_tree(two_roots, RootPolicy::kSingle));
  EXPECT_TRUE(is_legal_tree(two_roots, RootPolicy::kMulti));
}

TEST(LegalTree, OutOfRangeAndSelfLoop) {
  const std::vector<int> self{1};
  const std::vector<int> range{0, 3};
  const std::vector<int> none{1, 1};
  EXPECT_FALSE(is_legal_tree(self));
  EXPECT_FALSE(is_legal_tree(range));
  EXPECT_FALSE(is_legal_tree(none, RootPolicy::kMulti));
}

TEST(Projective, Examples) {
  EXPECT_TRUE(is_projective(kTelescope));
  EXPECT_FALSE(is_projective(DepTree({0, 4, 1, 1})));
  EXPECT_TRUE(is_projective(DepTree({0})));
  EXPECT_THROW(is_projective(DepTree({2, 1})), std::invalid_argument);
}

TEST(Projective, RootArcCrossing) {
  // The root arc 0 -> 3 is crossed by 2 -> 4.
  EXPECT_FALSE(is_projective(DepTree({3, 3, 0, 2})));
}

TEST(Enumerate, Counts) {
  const int single[] = {1, 2, 7, 30, 143, 728, 3876, 21318};
  const int multi[] = {1, 3, 12, 55, 273, 1428, 7752, 43263};
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(enumerate_projective_trees(n, RootPolicy::kSingle).size(), single[n - 1]);
    EXPECT_EQ(enumerate_projective_trees(n, RootPolicy::kMulti).size(), multi[n - 1]);
  }
}

TEST(Enumerate, TwoWordSingleRoot) {
  const auto trees = enumerate_projective_trees(2);
  const std::set<std::vector<int>> got{trees[0].heads, trees[1].heads};
  EXPECT_EQ(got, (std::set<std::vector<int>>{{0, 1}, {2, 0}}));
}

TEST(Enumerate, GuardsLength) {
  EXPECT_THROW(enumerate_projective_trees(9), std::invalid_argument);
  EXPECT_THROW(enumerate_projective_trees(0), std::invalid_argument);
}

TEST(Enumerate, AllLegalProjectiveDistinct) {
  for (RootPolicy p : {RootPolicy::kSingle, RootPolicy::kMulti}) {
    for (int n = 1; n <= 6; ++n) {
      const auto trees = enumerate_projective_trees(n, p);
      std::set<std::vector<int>> seen;
      for (const auto& t : trees) {
        EXPECT_TRUE(is_legal_tree(t.heads, p));
        EXPECT_TRUE(is_projective(t));
        EXPECT_TRUE(seen.insert(t.heads).second);
      }
    }
  }
}

TEST(Properties, TripleCountMatchesChildren) {
  for (const auto& t : enumerate_projective_trees(6, RootPolicy::kMulti)) {
    std::size_t want = 0;
    for (int h = 0; h <= 6; ++h) {
      int left = 0, right = 0;
      for (int j = 1; j <= 6; ++j) {
        if (t.head(j) != h) continue;
        (j < h ? left : right)++;
      }
      want += std::max(0, left - 1) + std::max(0, right - 1);
    }
    EXPECT_EQ(extract_sib_triples(t).size(), want);
  }
}

TEST(Properties, ScoreAdditive) {
  std::mt19937_64 rng(5);
  const ArcScores a = random_arcs(5, rng);
  const SibScores s = random_sibs(5, rng);
  for (const auto& t : enumerate_projective_trees(5, RootPolicy::kMulti)) {
    double sib_sum = 0.0;
    for (const auto& tr : extract_sib_triples(t)) sib_sum += s(tr.head, tr.sib, tr.mod);
    EXPECT_NEAR(tree_score(a, &s, t), tree_score(a, t) + sib_sum, 1e-12);
  }
}

TEST(PartialTree, Consistency) {
  EXPECT_TRUE(PartialTree({kUnknownHead, 1, kUnknownHead}).consistent());
  EXPECT_FALSE(PartialTree({2, 1, kUnknownHead}).consistent());
  EXPECT_FALSE(PartialTree({5, kUnknownHead}).consistent());
  EXPECT_EQ(PartialTree({kUnknownHead, 1, 0}).num_annotated(), 2);
}

TEST(RootPolicyNames, RoundTrip) {
  for (RootPolicy p : {RootPolicy::kSingle, RootPolicy::kMulti}) {
    EXPECT_EQ(root_policy_from_string(to_string(p)), p);
  }
  EXPECT_THROW(root_policy_from_string("both"), std::invalid_argument);
}

TEST(Scores, ConstructorsMarkUnusedCells) {
  ArcScores a(3);
  EXPECT_TRUE(is_neg_inf(a(1, 1)));
  EXPECT_TRUE(is_neg_inf(a(2, 0)));
  a.at(0, 1) = NAN;
  EXPECT_THROW(a.check_finite(), std::invalid_argument);
}
