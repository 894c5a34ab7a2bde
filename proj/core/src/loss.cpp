#include "treecrf/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "treecrf/detail/logspace.hpp"
#include "treecrf/tree.hpp"

namespace treecrf {

namespace {

std::span<const SibScores> one_or_none(const SibScores* sibs) {
  return sibs != nullptr ? std::span<const SibScores>(sibs, 1)
                         : std::span<const SibScores>();
}

void check_batch(std::size_t arcs, std::size_t sibs, std::size_t gold) {
  if (gold != arcs || (sibs != 0 && sibs != arcs)) {
    throw std::invalid_argument("loss: batch sizes differ");
  }
}

}  // namespace

LossResult crf_loss(std::span<const ArcScores> arcs,
                    std::span<const SibScores> sibs,
                    std::span<const DepTree> gold,
                    const InferenceOptions& opts) {
  check_batch(arcs.size(), sibs.size(), gold.size());
  for (std::size_t b = 0; b < gold.size(); ++b) {
    if (gold[b].n() != arcs[b].n()) {
      throw std::invalid_argument("crf_loss: gold length does not match scores");
    }
    if (!is_legal_tree(gold[b].heads, opts.root) || !is_projective(gold[b])) {
      throw std::invalid_argument(
          "crf_loss: gold tree is not a legal projective tree");
    }
  }
  std::vector<double> log_z;
  std::vector<Marginals> marg = batch_marginals(arcs, sibs, opts, &log_z);

  LossResult out;
  for (std::size_t b = 0; b < arcs.size(); ++b) {
    const SibScores* s = sibs.empty() ? nullptr : &sibs[b];
    out.value += log_z[b] - tree_score(arcs[b], s, gold[b]);

    const int n = arcs[b].n();
    std::vector<double> g = std::move(marg[b].arc);
    for (int j = 1; j <= n; ++j) g[gold[b].head(j) * (n + 1) + j] -= 1.0;
    out.arc_grad.push_back(std::move(g));
    if (s != nullptr) {
      std::vector<double> gs = std::move(marg[b].sib);
      for (const SibTriple& t : extract_sib_triples(gold[b])) {
        gs[(t.head * (n + 1) + t.sib) * (n + 1) + t.mod] -= 1.0;
      }
      out.sib_grad.push_back(std::move(gs));
    }
  }
  return out;
}

LossResult crf_loss(const ArcScores& arcs, const SibScores* sibs,
                    const DepTree& gold, const InferenceOptions& opts) {
  return crf_loss(std::span<const ArcScores>(&arcs, 1), one_or_none(sibs),
                  std::span<const DepTree>(&gold, 1), opts);
}

LossResult partial_crf_loss(std::span<const ArcScores> arcs,
                            std::span<const SibScores> sibs,
                            std::span<const PartialTree> partial,
                            const InferenceOptions& opts) {
  check_batch(arcs.size(), sibs.size(), partial.size());
  std::vector<double> log_z;
  std::vector<Marginals> marg = batch_marginals(arcs, sibs, opts, &log_z);

  LossResult out;
  for (std::size_t b = 0; b < arcs.size(); ++b) {
    const SibScores* s = sibs.empty() ? nullptr : &sibs[b];
    double log_zp = 0.0;
    const Marginals cm = constrained_marginals(arcs[b], s, partial[b], opts,
                                               &log_zp);
    out.value += log_z[b] - log_zp;

    std::vector<double> g = std::move(marg[b].arc);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] -= cm.arc[k];
    out.arc_grad.push_back(std::move(g));
    if (s != nullptr) {
      std::vector<double> gs = std::move(marg[b].sib);
      for (std::size_t k = 0; k < gs.size(); ++k) gs[k] -= cm.sib[k];
      out.sib_grad.push_back(std::move(gs));
    }
  }
  return out;
}

LossResult partial_crf_loss(const ArcScores& arcs, const SibScores* sibs,
                            const PartialTree& partial,
                            const InferenceOptions& opts) {
  return partial_crf_loss(std::span<const ArcScores>(&arcs, 1),
                          one_or_none(sibs),
                          std::span<const PartialTree>(&partial, 1), opts);
}

LossResult local_ce_loss(std::span<const ArcScores> arcs,
                         std::span<const PartialTree> gold) {
  check_batch(arcs.size(), 0, gold.size());
  LossResult out;
  std::vector<double> logits;
  for (std::size_t b = 0; b < arcs.size(); ++b) {
    const ArcScores& a = arcs[b];
    const int n = a.n();
    if (gold[b].n() != n) {
      throw std::invalid_argument("local_ce_loss: gold length does not match");
    }
    std::vector<double> g((n + 1) * (n + 1), 0.0);
    for (int j = 1; j <= n; ++j) {
      if (!gold[b].annotated(j)) continue;
      const int h = gold[b].head(j);
      if (h < 0 || h > n || h == j) {
        throw std::invalid_argument("local_ce_loss: gold head out of range");
      }
      logits.clear();
      for (int i = 0; i <= n; ++i) {
        if (i != j) logits.push_back(a(i, j));
      }
      const double lse =
          detail::log_sum_exp(logits.data(), static_cast<int>(logits.size()));
      out.value += lse - a(h, j);
      for (int i = 0; i <= n; ++i) {
        if (i != j) g[i * (n + 1) + j] = std::exp(a(i, j) - lse);
      }
      g[h * (n + 1) + j] -= 1.0;
    }
    out.arc_grad.push_back(std::move(g));
  }
  return out;
}

LossResult local_ce_loss(const ArcScores& arcs, const PartialTree& gold) {
  return local_ce_loss(std::span<const ArcScores>(&arcs, 1),
                       std::span<const PartialTree>(&gold, 1));
}

LabelLossResult label_ce_loss(const LabelScores& scores,
                              std::span<const int> heads,
                              std::span<const int> labels) {
  const int n = scores.n();
  const int L = scores.num_labels();
  if (static_cast<int>(heads.size()) != n ||
      static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("label_ce_loss: length mismatch");
  }
  LabelLossResult out;
  out.grad.assign(scores.values().size(), 0.0);
  if (L == 0) return out;
  for (int j = 1; j <= n; ++j) {
    const int h = heads[j - 1];
    const int l = labels[j - 1];
    if (h == kUnknownHead || l < 0) continue;
    if (l >= L) throw std::invalid_argument("label_ce_loss: label out of range");
    const double* row = &scores.values()[(h * (n + 1) + j) * L];
    const double lse = detail::log_sum_exp(row, L);
    out.value += lse - row[l];
    double* grow = &out.grad[(h * (n + 1) + j) * L];
    for (int k = 0; k < L; ++k) grow[k] = std::exp(row[k] - lse);
    grow[l] -= 1.0;
  }
  return out;
}

}  // namespace treecrf
