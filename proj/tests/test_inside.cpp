#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "treecrf/inside.hpp"

using namespace treecrf;
using namespace treecrf::testing;

namespace {

double logz1(const ArcScores& a, RootPolicy p = RootPolicy::kSingle) {
  return inside_first_order(std::span(&a, 1), {p}).log_partition[0];
}

double logz2(const ArcScores& a, const SibScores& s,
             RootPolicy p = RootPolicy::kSingle) {
  return inside_second_order(std::span(&a, 1), std::span(&s, 1), {p})
      .log_partition[0];
}

const RootPolicy kPolicies[] = {RootPolicy::kSingle, RootPolicy::kMulti};

}  // namespace

TEST(InsideFirstOrder, SingleWord) {
  ArcScores a(1);
  a.at(0, 1) = 2.0;
  EXPECT_DOUBLE_EQ(logz1(a), 2.0);
  EXPECT_DOUBLE_EQ(logz1(a, RootPolicy::kMulti), 2.0);
}

TEST(InsideFirstOrder, CountsThreeWords) {
  EXPECT_NEAR(logz1(constant_arcs(3, 0.0)), std::log(7.0), 1e-12);
  EXPECT_NEAR(logz1(constant_arcs(3, 0.0), RootPolicy::kMulti), std::log(12.0), 1e-12);
}

TEST(InsideFirstOrder, MatchesEnumeration) {
  std::mt19937_64 rng(1);
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 6; ++n) {
      for (int rep = 0; rep < 10; ++rep) {
        const ArcScores a = random_arcs(n, rng);
        EXPECT_NEAR(logz1(a, p), enumerate(a, nullptr, p).log_z, 1e-8);
      }
    }
  }
}

TEST(InsideFirstOrder, MatchesNaiveBaseline) {
  std::mt19937_64 rng(2);
  for (RootPolicy p : kPolicies) {
    for (int n : {1, 2, 7, 15}) {
      const ArcScores a = random_arcs(n, rng);
      EXPECT_NEAR(logz1(a, p), naive_inside(a, p), 1e-9);
    }
  }
}

TEST(InsideFirstOrder, Errors) {
  std::vector<ArcScores> none;
  EXPECT_THROW(inside_first_order(none), std::invalid_argument);
  std::vector<ArcScores> empty{ArcScores(0)};
  EXPECT_THROW(inside_first_order(empty), std::invalid_argument);
  ArcScores bad = constant_arcs(2, 0.0);
  bad.at(0, 2) = INFINITY;
  EXPECT_THROW(logz1(bad), std::invalid_argument);
}

TEST(InsideSecondOrder, ZeroSibsReduceToFirstOrder) {
  std::mt19937_64 rng(3);
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 8; ++n) {
      const ArcScores a = random_arcs(n, rng);
      EXPECT_NEAR(logz2(a, SibScores(n), p), logz1(a, p), 1e-9);
    }
  }
}

TEST(InsideSecondOrder, OneTripleThreeWords) {
  SibScores s(3);
  s.at(1, 2, 3) = 1.0;
  EXPECT_NEAR(logz2(constant_arcs(3, 0.0), s), std::log(6.0 + std::exp(1.0)), 1e-12);
}

TEST(InsideSecondOrder, MatchesEnumeration) {
  std::mt19937_64 rng(4);
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 5; ++n) {
      for (int rep = 0; rep < 10; ++rep) {
        const ArcScores a = random_arcs(n, rng);
        const SibScores s = random_sibs(n, rng);
        EXPECT_NEAR(logz2(a, s, p), enumerate(a, &s, p).log_z, 1e-8);
      }
    }
  }
}

TEST(InsideSecondOrder, RootSiblingsIgnoredUnderSingleRoot) {
  std::mt19937_64 rng(5);
  const ArcScores a = random_arcs(4, rng);
  SibScores s = random_sibs(4, rng);
  const double before = logz2(a, s);
  s.at(0, 1, 2) += 3.0;
  s.at(0, 2, 4) -= 3.0;
  EXPECT_DOUBLE_EQ(logz2(a, s), before);
  EXPECT_NE(logz2(a, s, RootPolicy::kMulti), before);
}

TEST(InsideSecondOrder, DimensionMismatch) {
  const ArcScores a = constant_arcs(3, 0.0);
  const SibScores s(4);
  EXPECT_THROW(logz2(a, s), std::invalid_argument);
}

TEST(ConstrainedInside, Examples) {
  std::mt19937_64 rng(6);
  const ArcScores a = random_arcs(4, rng);
  const SibScores s = random_sibs(4, rng);
  EXPECT_NEAR(constrained_inside(a, &s, PartialTree::empty(4)), logz2(a, s), 1e-12);
  const DepTree t({0, 1, 2, 2});
  EXPECT_NEAR(constrained_inside(a, &s, PartialTree::from_tree(t)),
              tree_score(a, &s, t), 1e-12);
  EXPECT_NEAR(constrained_inside(constant_arcs(3, 0.0), nullptr,
                                 PartialTree({kUnknownHead, 1, kUnknownHead})),
              std::log(3.0), 1e-12);
}

TEST(ConstrainedInside, IncompatibleAnnotation) {
  const ArcScores a = constant_arcs(4, 0.0);
  // Crossing arcs 1 -> 3 and 2 -> 4.
  EXPECT_TRUE(is_neg_inf(
      constrained_inside(a, nullptr, PartialTree({kUnknownHead, 4, 1, kUnknownHead}))));
  // Cycle.
  EXPECT_TRUE(is_neg_inf(
      constrained_inside(a, nullptr, PartialTree({2, 1, kUnknownHead, kUnknownHead}))));
  // Two root attachments under the single-root policy.
  EXPECT_TRUE(is_neg_inf(
      constrained_inside(a, nullptr, PartialTree({0, 0, kUnknownHead, kUnknownHead}))));
  EXPECT_THROW(constrained_marginals(a, nullptr, PartialTree({2, 1, kUnknownHead, kUnknownHead})),
               std::domain_error);
}

TEST(ConstrainedInside, MatchesEnumeration) {
  std::mt19937_64 rng(7);
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 5; ++n) {
      for (int rep = 0; rep < 10; ++rep) {
        const ArcScores a = random_arcs(n, rng);
        const SibScores s = random_sibs(n, rng);
        const Enumerated e = enumerate(a, &s, p);
        const DepTree& ref = e.trees[rng() % e.trees.size()];
        PartialTree partial = PartialTree::empty(n);
        for (int j = 1; j <= n; ++j)
          if (rng() % 2) partial.heads[j - 1] = ref.head(j);
        std::vector<double> compat;
        for (std::size_t k = 0; k < e.trees.size(); ++k)
          if (compatible(e.trees[k], partial)) compat.push_back(e.scores[k]);
        EXPECT_NEAR(constrained_inside(a, &s, partial, {p}), lse(compat), 1e-8);
      }
    }
  }
}

TEST(ConstrainedInside, Monotone) {
  std::mt19937_64 rng(8);
  const ArcScores a = random_arcs(6, rng);
  const DepTree t({2, 0, 2, 2, 6, 4});
  PartialTree partial = PartialTree::empty(6);
  double prev = logz1(a);
  for (int j = 1; j <= 6; ++j) {
    partial.heads[j - 1] = t.head(j);
    const double cur = constrained_inside(a, nullptr, partial);
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(Marginals, Examples) {
  ArcScores one(1);
  one.at(0, 1) = -3.0;
  EXPECT_DOUBLE_EQ(marginals(one).arc_at(0, 1), 1.0);

  const Marginals m = marginals(constant_arcs(2, 0.0));
  EXPECT_NEAR(m.arc_at(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(m.arc_at(0, 2), 0.5, 1e-15);
  EXPECT_NEAR(m.arc_at(1, 2), 0.5, 1e-15);
  EXPECT_NEAR(m.arc_at(2, 1), 0.5, 1e-15);
}

TEST(Marginals, MatchEnumerationAndFiniteDifferences) {
  std::mt19937_64 rng(9);
  const double h = 1e-5;
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 5; ++n) {
      ArcScores a = random_arcs(n, rng);
      SibScores s = random_sibs(n, rng);
      const Enumerated e = enumerate(a, &s, p);
      const Marginals m = marginals(a, &s, {p});
      const std::size_t S = n + 1;
      for (int i = 0; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
          if (i == j) continue;
          EXPECT_NEAR(m.arc_at(i, j), e.arc[i * S + j], 1e-8);
          const double keep = a.at(i, j);
          a.at(i, j) = keep + h;
          const double up = logz2(a, s, p);
          a.at(i, j) = keep - h;
          const double down = logz2(a, s, p);
          a.at(i, j) = keep;
          EXPECT_NEAR(m.arc_at(i, j), (up - down) / (2 * h), 1e-4);
          for (int k = 1; k <= n; ++k) {
            if (!SibScores::valid(i, k, j)) continue;
            EXPECT_NEAR(m.sib_at(i, k, j), e.sib[(i * S + k) * S + j], 1e-8);
            const double ks = s.at(i, k, j);
            s.at(i, k, j) = ks + h;
            const double su = logz2(a, s, p);
            s.at(i, k, j) = ks - h;
            const double sd = logz2(a, s, p);
            s.at(i, k, j) = ks;
            EXPECT_NEAR(m.sib_at(i, k, j), (su - sd) / (2 * h), 1e-4);
          }
        }
      }
    }
  }
}

TEST(Marginals, ConstrainedMatchEnumeration) {
  std::mt19937_64 rng(10);
  const ArcScores a = random_arcs(5, rng);
  const SibScores s = random_sibs(5, rng);
  const PartialTree partial({kUnknownHead, 1, kUnknownHead, 5, kUnknownHead});
  const Enumerated e = enumerate(a, &s, RootPolicy::kSingle);
  std::vector<double> compat;
  for (std::size_t k = 0; k < e.trees.size(); ++k)
    if (compatible(e.trees[k], partial)) compat.push_back(e.scores[k]);
  const double zp = lse(compat);
  std::vector<double> want(36, 0.0);
  for (std::size_t k = 0; k < e.trees.size(); ++k) {
    if (!compatible(e.trees[k], partial)) continue;
    for (int j = 1; j <= 5; ++j) want[e.trees[k].head(j) * 6 + j] += std::exp(e.scores[k] - zp);
  }
  double got_z = 0.0;
  const Marginals m = constrained_marginals(a, &s, partial, {}, &got_z);
  EXPECT_NEAR(got_z, zp, 1e-10);
  for (int i = 0; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j)
      if (i != j) EXPECT_NEAR(m.arc_at(i, j), want[i * 6 + j], 1e-9);
}

TEST(Properties, Normalization) {
  std::mt19937_64 rng(12);
  for (RootPolicy p : kPolicies) {
    for (int n = 1; n <= 25; n += 3) {
      const ArcScores a = random_arcs(n, rng, -4, 4);
      const SibScores s = random_sibs(n, rng, -2, 2);
      for (const Marginals& m : {marginals(a, nullptr, {p}), marginals(a, &s, {p})}) {
        for (int j = 1; j <= n; ++j) {
          double col = 0.0;
          for (int i = 0; i <= n; ++i) {
            if (i == j) continue;
            EXPECT_GE(m.arc_at(i, j), 0.0);
            EXPECT_LE(m.arc_at(i, j), 1.0 + 1e-12);
            col += m.arc_at(i, j);
          }
          EXPECT_NEAR(col, 1.0, 1e-9);
        }
      }
    }
  }
}

TEST(Properties, ShiftInvariance) {
  std::mt19937_64 rng(13);
  const double c = 1.7;
  for (RootPolicy p : kPolicies) {
    for (int n : {1, 4, 9}) {
      const ArcScores a = random_arcs(n, rng);
      ArcScores b = a;
      for (int i = 0; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
          if (i != j) b.at(i, j) += c;
      EXPECT_NEAR(logz1(b, p), logz1(a, p) + n * c, 1e-9);
      const Marginals ma = marginals(a, nullptr, {p});
      const Marginals mb = marginals(b, nullptr, {p});
      for (std::size_t k = 0; k < ma.arc.size(); ++k) EXPECT_NEAR(ma.arc[k], mb.arc[k], 1e-9);
    }
  }
}

TEST(Properties, BatchedEqualsSingle) {
  std::mt19937_64 rng(14);
  std::vector<ArcScores> arcs;
  std::vector<SibScores> sibs;
  for (int b = 0; b < 12; ++b) {
    const int n = 1 + static_cast<int>(rng() % 30);
    arcs.push_back(random_arcs(n, rng));
    sibs.push_back(random_sibs(n, rng));
  }
  for (RootPolicy p : kPolicies) {
    const auto r1 = inside_first_order(arcs, {p});
    const auto r2 = inside_second_order(arcs, sibs, {p});
    std::vector<double> z;
    const auto ms = batch_marginals(arcs, sibs, {p}, &z);
    for (std::size_t b = 0; b < arcs.size(); ++b) {
      EXPECT_NEAR(r1.log_partition[b], logz1(arcs[b], p), 1e-10);
      EXPECT_NEAR(r2.log_partition[b], logz2(arcs[b], sibs[b], p), 1e-10);
      EXPECT_NEAR(z[b], r2.log_partition[b], 1e-10);
      const Marginals single = marginals(arcs[b], &sibs[b], {p});
      for (std::size_t k = 0; k < single.arc.size(); ++k)
        EXPECT_NEAR(ms[b].arc[k], single.arc[k], 1e-10);
    }
  }
}

TEST(Properties, LongSentencesStayFinite) {
  std::mt19937_64 rng(15);
  const ArcScores a = random_arcs(60, rng, -30, 30);
  const SibScores s = random_sibs(60, rng, -10, 10);
  EXPECT_TRUE(std::isfinite(logz2(a, s)));
  const Marginals m = marginals(a, &s);
  for (double v : m.arc) EXPECT_TRUE(std::isfinite(v));
}

TEST(Charts, CompleteDiagonalIsZero) {
  std::mt19937_64 rng(16);
  std::vector<ArcScores> arcs{random_arcs(3, rng), random_arcs(5, rng)};
  const auto r = inside_first_order(arcs, {RootPolicy::kMulti});
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i <= arcs[b].n(); ++i) EXPECT_EQ(r.charts.complete(b, i, i), 0.0);
  EXPECT_NEAR(r.charts.complete(1, 0, 5), r.log_partition[1], 1e-12);
}
