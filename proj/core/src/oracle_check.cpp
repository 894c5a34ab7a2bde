#include "treecrf/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "treecrf/decode.hpp"
#include "treecrf/detail/logspace.hpp"
#include "treecrf/inside.hpp"
#include "treecrf/loss.hpp"
#include "treecrf/tree.hpp"

namespace treecrf {

namespace {

class Suite {
 public:
  Suite(const OracleOptions& opts, std::ostream* log) : opts_(opts), log_(log) {}

  void expect_near(double got, double want, double tol, const std::string& what) {
    ++report.checks;
    if (std::abs(got - want) <= tol) return;
    char buf[64];
    std::snprintf(buf, sizeof(buf), ": got %.12g want %.12g", got, want);
    fail(what + buf);
  }

  void fail(const std::string& msg) {
    report.failures.push_back(msg);
    if (log_) *log_ << "FAIL " << msg << '\n';
  }

  void note(const std::string& msg) {
    if (log_) *log_ << msg << '\n';
  }

  void counting() {
    for (RootPolicy policy : {RootPolicy::kSingle, RootPolicy::kMulti}) {
      for (int n = 1; n <= 6; ++n) {
        const auto trees = enumerate_projective_trees(n, policy);
        ArcScores zero(n);
        for (int i = 0; i <= n; ++i)
          for (int j = 1; j <= n; ++j)
            if (i != j) zero.at(i, j) = 0.0;
        const double logz =
            inside_first_order(std::span(&zero, 1), {policy}).log_partition[0];
        expect_near(logz, std::log(static_cast<double>(trees.size())), 1e-12,
                    "count n=" + std::to_string(n) + " " + to_string(policy));
        if (n == 3) {
          note("count n=3 " + std::string(to_string(policy)) + ": " +
               std::to_string(trees.size()) + " trees");
        }
      }
    }
  }

  void instance(int n, RootPolicy policy, std::mt19937_64& rng, bool fault) {
    std::uniform_real_distribution<double> arc_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> sib_dist(-1.0, 1.0);
    ArcScores arcs(n);
    SibScores sibs(n);
    for (int i = 0; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j) arcs.at(i, j) = arc_dist(rng);
        for (int k = 1; k <= n; ++k) {
          if (SibScores::valid(i, k, j)) sibs.at(i, k, j) = sib_dist(rng);
        }
      }
    }
    const std::string tag =
        "n=" + std::to_string(n) + " " + to_string(policy) + ": ";
    const InferenceOptions io{policy};
    const auto trees = enumerate_projective_trees(n, policy);

    // Oracle side.
    std::vector<double> s1, s2;
    for (const auto& t : trees) {
      s1.push_back(tree_score(arcs, t));
      s2.push_back(tree_score(arcs, &sibs, t));
    }
    const double z1 = detail::log_sum_exp(s1.data(), static_cast<int>(s1.size()));
    const double z2 = detail::log_sum_exp(s2.data(), static_cast<int>(s2.size()));
    const std::size_t S = n + 1;
    std::vector<double> m1(S * S, 0.0), m2(S * S, 0.0), ms(S * S * S, 0.0);
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const double p1 = std::exp(s1[t] - z1);
      const double p2 = std::exp(s2[t] - z2);
      for (int j = 1; j <= n; ++j) {
        m1[trees[t].head(j) * S + j] += p1;
        m2[trees[t].head(j) * S + j] += p2;
      }
      for (const auto& tr : extract_sib_triples(trees[t])) {
        ms[(tr.head * S + tr.sib) * S + tr.mod] += p2;
      }
    }

    if (fault) arcs.at(0, 1) += 0.5;

    // Partition functions.
    expect_near(inside_first_order(std::span(&arcs, 1), io).log_partition[0], z1,
                opts_.tolerance, tag + "first-order log Z");
    expect_near(inside_second_order(std::span(&arcs, 1), std::span(&sibs, 1), io)
                    .log_partition[0],
                z2, opts_.tolerance, tag + "second-order log Z");

    // Marginals and normalization.
    const Marginals a1 = marginals(arcs, nullptr, io);
    const Marginals a2 = marginals(arcs, &sibs, io);
    for (int j = 1; j <= n; ++j) {
      double col1 = 0.0, col2 = 0.0;
      for (int i = 0; i <= n; ++i) {
        if (i == j) continue;
        expect_near(a1.arc_at(i, j), m1[i * S + j], opts_.tolerance,
                    tag + "first-order marginal");
        expect_near(a2.arc_at(i, j), m2[i * S + j], opts_.tolerance,
                    tag + "second-order marginal");
        col1 += a1.arc_at(i, j);
        col2 += a2.arc_at(i, j);
        for (int k = 1; k <= n; ++k) {
          if (SibScores::valid(i, k, j)) {
            expect_near(a2.sib_at(i, k, j), ms[(i * S + k) * S + j],
                        opts_.tolerance, tag + "sibling marginal");
          }
        }
      }
      expect_near(col1, 1.0, 1e-9, tag + "first-order normalization");
      expect_near(col2, 1.0, 1e-9, tag + "second-order normalization");
    }

    // Decoding.
    const double max1 = *std::max_element(s1.begin(), s1.end());
    const double max2 = *std::max_element(s2.begin(), s2.end());
    const DecodeResult d1 = eisner1(arcs, policy);
    const DecodeResult d2 = eisner2(arcs, sibs, policy);
    expect_near(d1.score, max1, 1e-10, tag + "eisner1 score");
    expect_near(tree_score(arcs, d1.tree), max1, 1e-10, tag + "eisner1 tree");
    expect_near(d2.score, max2, 1e-10, tag + "eisner2 score");
    expect_near(tree_score(arcs, &sibs, d2.tree), max2, 1e-10,
                tag + "eisner2 tree");
    double best_msum = -1.0;
    for (const auto& t : trees) {
      double sum = 0.0;
      for (int j = 1; j <= n; ++j) sum += m1[t.head(j) * S + j];
      best_msum = std::max(best_msum, sum);
    }
    const DecodeResult mbr = mbr_decode(a1, policy);
    double got_msum = 0.0;
    for (int j = 1; j <= n; ++j) got_msum += m1[mbr.tree.head(j) * S + j];
    expect_near(got_msum, best_msum, 1e-9, tag + "mbr marginal sum");

    // Partial annotation: keep each head of a random tree with p = 1/2.
    const DepTree& ref = trees[std::uniform_int_distribution<std::size_t>(
        0, trees.size() - 1)(rng)];
    PartialTree partial = PartialTree::empty(n);
    for (int j = 1; j <= n; ++j) {
      if (rng() & 1) partial.heads[j - 1] = ref.head(j);
    }
    std::vector<double> compat;
    for (std::size_t t = 0; t < trees.size(); ++t) {
      bool ok = true;
      for (int j = 1; j <= n && ok; ++j) {
        ok = !partial.annotated(j) || partial.head(j) == trees[t].head(j);
      }
      if (ok) compat.push_back(s2[t]);
    }
    const double zp =
        detail::log_sum_exp(compat.data(), static_cast<int>(compat.size()));
    expect_near(constrained_inside(arcs, &sibs, partial, io), zp,
                opts_.tolerance, tag + "constrained log Z");
    expect_near(partial_crf_loss(arcs, &sibs, partial, io).value, z2 - zp,
                opts_.tolerance, tag + "partial loss");
    expect_near(crf_loss(arcs, &sibs, ref, io).value,
                z2 - tree_score(arcs, &sibs, ref), opts_.tolerance,
                tag + "crf loss");
  }

  void run() {
    counting();
    std::mt19937_64 rng(opts_.seed);
    bool fault = opts_.inject_fault;
    for (RootPolicy policy : {RootPolicy::kSingle, RootPolicy::kMulti}) {
      for (int n = 1; n <= opts_.max_n; ++n) {
        const std::size_t before = report.failures.size();
        for (int k = 0; k < opts_.instances; ++k) {
          instance(n, policy, rng, fault);
          fault = false;
        }
        note("n=" + std::to_string(n) + " " + to_string(policy) + ": " +
             std::to_string(opts_.instances) + " instances, " +
             std::to_string(report.failures.size() - before) + " failures");
      }
    }
  }

  OracleReport report;

 private:
  OracleOptions opts_;
  std::ostream* log_;
};

}  // namespace

OracleReport run_oracle_check(const OracleOptions& opts, std::ostream* log) {
  if (opts.instances < 1 || opts.max_n < 1 || opts.max_n > 6) {
    throw std::invalid_argument("oracle check: need instances >= 1 and 1 <= max_n <= 6");
  }
  Suite suite(opts, log);
  suite.run();
  return suite.report;
}

}  // namespace treecrf
