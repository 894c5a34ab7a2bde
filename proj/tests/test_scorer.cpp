#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracle.hpp"
#include "treecrf/loss.hpp"
#include "treecrf/model.hpp"
#include "treecrf/scorer.hpp"

using namespace treecrf;

namespace {

Mat random_mat(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = d(rng);
  return m;
}

std::vector<double> random_vec(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(size);
  for (double& x : v) x = d(rng);
  return v;
}

double dot(const std::vector<double>& g, const std::vector<double>& values,
           auto valid) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (valid(k)) s += g[k] * values[k];
  return s;
}

// Central difference of `f` with respect to every entry of `m`, compared
// with `grad`.
template <class F>
void check_fd(Mat& m, const Mat& grad, F f, double tol = 1e-4) {
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double keep = m.data()[k];
    m.data()[k] = keep + h;
    const double up = f();
    m.data()[k] = keep - h;
    const double down = f();
    m.data()[k] = keep;
    EXPECT_NEAR(grad.data()[k], (up - down) / (2 * h), tol) << "entry " << k;
  }
}

}  // namespace

TEST(Biaffine, ZeroWeights) {
  std::mt19937_64 rng(1);
  const ArcScores s = biaffine_score(random_mat(4, 3, rng), random_mat(4, 3, rng),
                                     BiaffineParams::zeros(3));
  for (int i = 0; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      if (i != j) EXPECT_EQ(s(i, j), 0.0);
}

TEST(Biaffine, ScalarBilinear) {
  Mat h(3, 1), m(3, 1);
  h << 0.5, -1.0, 2.0;
  m << 3.0, 0.25, -4.0;
  BiaffineParams p = BiaffineParams::zeros(1);
  p.weight(0, 0) = 1.0;
  const ArcScores s = biaffine_score(h, m, p);
  for (int i = 0; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      if (i != j) EXPECT_DOUBLE_EQ(s(i, j), h(i, 0) * m(j, 0));
}

TEST(Biaffine, LinearInHead) {
  std::mt19937_64 rng(2);
  Mat h = random_mat(4, 3, rng);
  const Mat m = random_mat(4, 3, rng);
  const BiaffineParams p{random_mat(4, 3, rng)};
  const ArcScores before = biaffine_score(h, m, p);
  h.row(2) *= 2.0;
  const ArcScores after = biaffine_score(h, m, p);
  for (int j = 1; j <= 3; ++j) {
    if (j != 2) EXPECT_NEAR(after(2, j), 2.0 * before(2, j), 1e-12);
    if (j != 1) EXPECT_NEAR(after(1, j), before(1, j), 1e-12);
  }
}

TEST(Biaffine, DimensionMismatch) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(biaffine_score(random_mat(4, 3, rng), random_mat(4, 2, rng),
                              BiaffineParams::zeros(3)),
               std::invalid_argument);
}

TEST(Biaffine, Backward) {
  std::mt19937_64 rng(4);
  const int n = 4, d = 3;
  Mat h = random_mat(n + 1, d, rng), m = random_mat(n + 1, d, rng);
  BiaffineParams p{random_mat(d + 1, d, rng)};
  const auto up = random_vec((n + 1) * (n + 1), rng);
  auto f = [&] {
    return dot(up, biaffine_score(h, m, p).values(),
               [&](std::size_t k) { return ArcScores::valid(k / (n + 1), k % (n + 1)); });
  };
  BiaffineParams dp = BiaffineParams::zeros(d);
  Mat dh = Mat::Zero(n + 1, d), dm = Mat::Zero(n + 1, d);
  biaffine_backward(h, m, p, up, dp, dh, dm);
  check_fd(p.weight, dp.weight, f);
  check_fd(h, dh, f);
  check_fd(m, dm, f);

  // Zero upstream gradient gives zero parameter gradient.
  BiaffineParams z = BiaffineParams::zeros(d);
  Mat zh = Mat::Zero(n + 1, d), zm = Mat::Zero(n + 1, d);
  biaffine_backward(h, m, p, std::vector<double>(up.size(), 0.0), z, zh, zm);
  EXPECT_EQ(z.weight.norm(), 0.0);
}

TEST(Biaffine, SingleArcProductRule) {
  // n = 1, d = 1: s(0,1) = w h0 m1 + b h0, so ds/dw = h0 m1, ds/db = h0.
  Mat h(2, 1), m(2, 1);
  h << 1.5, 0.0;
  m << 0.0, -2.0;
  BiaffineParams p = BiaffineParams::zeros(1);
  p.weight << 0.7, 0.3;
  std::vector<double> up(4, 0.0);
  up[1] = 1.0;
  BiaffineParams dp = BiaffineParams::zeros(1);
  Mat dh = Mat::Zero(2, 1), dm = Mat::Zero(2, 1);
  biaffine_backward(h, m, p, up, dp, dh, dm);
  EXPECT_DOUBLE_EQ(dp.weight(0, 0), 1.5 * -2.0);
  EXPECT_DOUBLE_EQ(dp.weight(1, 0), 1.5);
  EXPECT_DOUBLE_EQ(dh(0, 0), 0.7 * -2.0 + 0.3);
  EXPECT_DOUBLE_EQ(dm(1, 0), 0.7 * 1.5);
}

TEST(Triaffine, ZeroWeights) {
  std::mt19937_64 rng(5);
  const SibScores s = triaffine_score(random_mat(4, 2, rng), random_mat(4, 2, rng),
                                      random_mat(4, 2, rng), TriaffineParams::zeros(2));
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(Triaffine, ScalarAllOnes) {
  Mat h(4, 1), sb(4, 1), m(4, 1);
  h << 0.5, 1.0, -2.0, 3.0;
  sb << 0.0, 0.2, -0.7, 1.1;
  m << 0.0, 1.3, 0.4, -0.6;
  TriaffineParams p = TriaffineParams::zeros(1);
  p.weight.setOnes();
  const SibScores s = triaffine_score(h, sb, m, p);
  for (int i = 0; i <= 3; ++i)
    for (int k = 1; k <= 3; ++k)
      for (int j = 1; j <= 3; ++j)
        if (SibScores::valid(i, k, j))
          EXPECT_NEAR(s(i, k, j), (sb(k, 0) + 1) * h(i, 0) * (m(j, 0) + 1), 1e-12);
}

TEST(Triaffine, WeightLayout) {
  // W[a][b][c] = (sibling, head, modifier).
  Mat h(3, 2), sb(3, 2), m(3, 2);
  h.setZero();
  sb.setZero();
  m.setZero();
  h(0, 1) = 2.0;   // head 0, component b = 1
  sb(1, 0) = 3.0;  // sibling 1, component a = 0
  m(2, 1) = 5.0;   // modifier 2, component c = 1
  TriaffineParams p = TriaffineParams::zeros(2);
  p.at(0, 1, 1) = 1.0;
  const SibScores s = triaffine_score(h, sb, m, p);
  EXPECT_DOUBLE_EQ(s(0, 1, 2), 30.0);
}

TEST(Triaffine, AdditiveInHead) {
  std::mt19937_64 rng(6);
  const int n = 4, d = 3;
  Mat h1 = random_mat(n + 1, d, rng), h2 = random_mat(n + 1, d, rng);
  const Mat sb = random_mat(n + 1, d, rng), m = random_mat(n + 1, d, rng);
  const TriaffineParams p{random_mat(d + 1, d * (d + 1), rng)};
  const Mat hsum = h1 + h2;
  const SibScores a = triaffine_score(h1, sb, m, p);
  const SibScores b = triaffine_score(h2, sb, m, p);
  const SibScores c = triaffine_score(hsum, sb, m, p);
  for (std::size_t k = 0; k < c.values().size(); ++k)
    EXPECT_NEAR(c.values()[k], a.values()[k] + b.values()[k], 1e-10);
}

TEST(Triaffine, Backward) {
  std::mt19937_64 rng(7);
  const int n = 4, d = 2;
  Mat h = random_mat(n + 1, d, rng), sb = random_mat(n + 1, d, rng),
      m = random_mat(n + 1, d, rng);
  TriaffineParams p{random_mat(d + 1, d * (d + 1), rng)};
  const std::size_t S = n + 1;
  const auto up = random_vec(S * S * S, rng);
  auto valid = [&](std::size_t k) {
    return SibScores::valid(static_cast<int>(k / (S * S)), static_cast<int>(k / S % S),
                            static_cast<int>(k % S));
  };
  auto f = [&] { return dot(up, triaffine_score(h, sb, m, p).values(), valid); };
  TriaffineParams dp = TriaffineParams::zeros(d);
  Mat dh = Mat::Zero(n + 1, d), ds = Mat::Zero(n + 1, d), dm = Mat::Zero(n + 1, d);
  triaffine_backward(h, sb, m, p, up, dp, dh, ds, dm);
  check_fd(p.weight, dp.weight, f);
  check_fd(h, dh, f);
  check_fd(sb, ds, f);
  check_fd(m, dm, f);
}

TEST(Label, Backward) {
  std::mt19937_64 rng(8);
  const int n = 3, d = 2, L = 3;
  Mat h = random_mat(n + 1, d, rng), m = random_mat(n + 1, d, rng);
  LabelParams p{random_mat(L, (d + 1) * (d + 1), rng)};
  const auto up = random_vec((n + 1) * (n + 1) * L, rng);
  auto f = [&] {
    return dot(up, label_score(h, m, p).values(), [&](std::size_t k) {
      const std::size_t cell = k / L;
      return ArcScores::valid(static_cast<int>(cell / (n + 1)), static_cast<int>(cell % (n + 1)));
    });
  };
  LabelParams dp = LabelParams::zeros(L, d);
  Mat dh = Mat::Zero(n + 1, d), dm = Mat::Zero(n + 1, d);
  label_backward(h, m, p, up, dp, dh, dm);
  check_fd(p.weight, dp.weight, f);
  check_fd(h, dh, f);
  check_fd(m, dm, f);
}

TEST(Projection, Backward) {
  std::mt19937_64 rng(9);
  Projection p{random_mat(3, 4, rng), random_mat(1, 3, rng)};
  Mat x = random_mat(5, 4, rng);
  const Mat up = random_mat(5, 3, rng);
  auto f = [&] { return (p.forward(x).array() * up.array()).sum(); };
  Projection g = Projection::zeros(4, 3);
  const Mat dx = p.backward(x, p.forward(x), up, g);
  check_fd(p.weight, g.weight, f);
  check_fd(p.bias, g.bias, f);
  check_fd(x, dx, f);
}

TEST(Model, BackwardMatchesFiniteDifferences) {
  for (ModelMode mode : {ModelMode::kLocal, ModelMode::kCrf, ModelMode::kCrf2o}) {
    ModelConfig cfg;
    cfg.mode = mode;
    cfg.word_dim = 3;
    cfg.pos_dim = 2;
    cfg.max_position = 4;
    cfg.arc_dim = 3;
    cfg.sib_dim = 2;
    cfg.label_dim = 2;
    Vocab vocab;
    for (const char* w : {"a", "b", "c"}) vocab.add_word(w);
    vocab.add_label("x");
    vocab.add_label("y");
    Model model(cfg, vocab, 3);
    // Non-zero score heads so every path carries gradient.
    std::mt19937_64 rng(10);
    for (auto& np : model.named_params()) {
      for (Eigen::Index k = 0; k < np.value->size(); ++k)
        np.value->data()[k] += 0.3 * std::normal_distribution<double>()(rng);
    }
    const std::vector<int> words{4, 6, 5, 4, 6};
    const DepTree gold({2, 0, 2, 5, 3});
    const std::vector<int> labels{0, 1, 1, -1, 0};
    auto loss = [&](ModelParams* grads) {
      const ForwardState st = model.forward(words);
      LossResult r;
      if (mode == ModelMode::kLocal) {
        r = local_ce_loss(st.arcs, gold);
      } else {
        r = crf_loss(st.arcs, mode == ModelMode::kCrf2o ? &st.sibs : nullptr, gold);
      }
      const LabelLossResult lab = label_ce_loss(st.labels, gold.heads, labels);
      if (grads) {
        model.backward(st, r.arc_grad[0], r.sib_grad.empty() ? std::vector<double>{} : r.sib_grad[0],
                       lab.grad, *grads);
      }
      return r.value + lab.value;
    };
    ModelParams grads = model.zero_grads();
    loss(&grads);
    auto params = model.named_params();
    auto gnamed = grads.named(cfg);
    ASSERT_EQ(params.size(), gnamed.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      SCOPED_TRACE(params[k].name);
      check_fd(*params[k].value, *gnamed[k].value, [&] { return loss(nullptr); }, 1e-5);
    }
  }
}

TEST(Model, BackwardRequiresForwardState) {
  Model model(ModelConfig{}, Vocab(), 1);
  ModelParams g = model.zero_grads();
  EXPECT_THROW(model.backward(ForwardState{}, {}, {}, {}, g), std::logic_error);
}

TEST(Model, SiblingDimensionDefaultsTo100) {
  EXPECT_EQ(ModelConfig{}.sib_dim, 100);
  ModelConfig cfg;
  cfg.mode = ModelMode::kCrf2o;
  Model model(cfg, Vocab(), 1);
  EXPECT_EQ(model.params().sib.dim(), 100);
}

TEST(Model, SaveLoadRoundTrip) {
  ModelConfig cfg;
  cfg.mode = ModelMode::kCrf2o;
  cfg.word_dim = 4;
  cfg.arc_dim = 5;
  cfg.sib_dim = 3;
  cfg.label_dim = 2;
  Vocab vocab;
  vocab.add_word("x");
  vocab.add_label("nsubj");
  Model model(cfg, vocab, 42);
  std::stringstream buf;
  model.save(buf);
  Model back = Model::load(buf);
  EXPECT_EQ(back.vocab().words(), model.vocab().words());
  EXPECT_EQ(back.vocab().labels(), model.vocab().labels());
  auto a = model.named_params();
  auto b = back.named_params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(*a[k].value, *b[k].value) << a[k].name;
  std::stringstream again;
  back.save(again);
  EXPECT_EQ(again.str(), buf.str());
}

TEST(Checkpoint, RejectsBadInput) {
  std::stringstream wrong_version("treecrf-checkpoint 2\nend\n");
  EXPECT_THROW(read_checkpoint(wrong_version), std::runtime_error);
  std::stringstream truncated("treecrf-checkpoint 1\nparam w 2 2 2\n1 2 3\n");
  EXPECT_THROW(read_checkpoint(truncated), std::runtime_error);
  std::stringstream no_end("treecrf-checkpoint 1\nmeta a b\n");
  EXPECT_THROW(read_checkpoint(no_end), std::runtime_error);

  std::stringstream ok("treecrf-checkpoint 1\nparam w 2 1 2\n1 2\nend\n");
  const Checkpoint c = read_checkpoint(ok);
  Mat m = Mat::Zero(2, 1);
  std::vector<NamedParam> params{{"w", &m, {2, 1}}};
  EXPECT_THROW(load_params(c, params), std::runtime_error);
}

TEST(Sgd, Examples) {
  Mat p(1, 1), g(1, 1);
  p << 1.0;
  g << 0.5;
  std::vector<NamedParam> ps{{"p", &p, {1}}}, gs{{"p", &g, {1}}};
  sgd_step(ps, gs, 0.1);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.95);

  g << 0.0;
  sgd_step(ps, gs, 0.1);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.95);
  EXPECT_THROW(sgd_step(ps, gs, 0.0), std::invalid_argument);
}

TEST(Sgd, TwoStepsEqualSummedStep) {
  Mat a(1, 2), b(1, 2), g1(1, 2), g2(1, 2), gs(1, 2);
  a << 0.3, -1.0;
  b = a;
  g1 << 0.2, 0.4;
  g2 << -0.1, 1.5;
  gs = g1 + g2;
  std::vector<NamedParam> pa{{"a", &a, {2}}}, pb{{"b", &b, {2}}};
  std::vector<NamedParam> n1{{"g", &g1, {2}}}, n2{{"g", &g2, {2}}}, ns{{"g", &gs, {2}}};
  SgdOptimizer opt({0.1, 0.0});
  opt.step(pa, n1);
  opt.step(pa, n2);
  sgd_step(pb, ns, 0.1);
  EXPECT_NEAR((a - b).norm(), 0.0, 1e-15);
}

TEST(Sgd, MomentumAndClipping) {
  Mat p(1, 1), g(1, 1);
  p << 0.0;
  g << 10.0;
  std::vector<NamedParam> ps{{"p", &p, {1}}}, gs{{"g", &g, {1}}};
  SgdOptimizer opt({0.1, 0.5, 1.0});
  opt.step(ps, gs);  // clipped to 1: v = 1
  EXPECT_DOUBLE_EQ(p(0, 0), -0.1);
  opt.step(ps, gs);  // v = 0.5 + 1
  EXPECT_DOUBLE_EQ(p(0, 0), -0.25);
  EXPECT_THROW(SgdOptimizer({0.1, 1.0}), std::invalid_argument);
}
