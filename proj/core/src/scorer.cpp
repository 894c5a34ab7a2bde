#include "treecrf/scorer.hpp"

#include <cmath>
#include <stdexcept>

namespace treecrf {

namespace {

Mat augment(const Mat& reps) {
  Mat out(reps.rows(), reps.cols() + 1);
  out.leftCols(reps.cols()) = reps;
  out.col(reps.cols()).setOnes();
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Arc-layout gradient restricted to valid cells, as an (n+1)x(n+1) matrix
// indexed (head, modifier).
Mat arc_grad_matrix(std::span<const double> grad, int n) {
  require(grad.size() == static_cast<std::size_t>((n + 1) * (n + 1)),
          "biaffine_backward: gradient size mismatch");
  Mat g = Mat::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i != j) g(i, j) = grad[i * (n + 1) + j];
    }
  }
  return g;
}

// Triaffine weight reordered so that row b holds W[:, b, :] flattened as
// (sibling, modifier).
Mat head_major(const TriaffineParams& params) {
  const int d = params.dim();
  const int a1 = d + 1;
  Mat out(d, a1 * a1);
  for (int b = 0; b < d; ++b) {
    for (int a = 0; a < a1; ++a) {
      out.block(b, a * a1, 1, a1) = params.weight.block(a, b * a1, 1, a1);
    }
  }
  return out;
}

}  // namespace

BiaffineParams BiaffineParams::zeros(int dim) {
  return {Mat::Zero(dim + 1, dim)};
}

TriaffineParams TriaffineParams::zeros(int dim) {
  return {Mat::Zero(dim + 1, dim * (dim + 1))};
}

LabelParams LabelParams::zeros(int num_labels, int dim) {
  return {Mat::Zero(num_labels, (dim + 1) * (dim + 1))};
}

int LabelParams::dim() const {
  const int a1 = static_cast<int>(std::lround(std::sqrt(weight.cols())));
  return a1 - 1;
}

Projection Projection::zeros(int in, int out) {
  return {Mat::Zero(out, in), Mat::Zero(1, out)};
}

Mat Projection::forward(const Mat& x) const {
  Mat pre = x * weight.transpose();
  pre.rowwise() += bias.row(0);
  return pre.array().tanh().matrix();
}

Mat Projection::backward(const Mat& x, const Mat& y, const Mat& dy,
                         Projection& grad) const {
  const Mat dpre = (dy.array() * (1.0 - y.array().square())).matrix();
  grad.weight += dpre.transpose() * x;
  grad.bias += dpre.colwise().sum();
  return dpre * weight;
}

ArcScores biaffine_score(const Mat& head, const Mat& mod,
                         const BiaffineParams& params) {
  require(head.rows() == mod.rows() && head.rows() >= 1,
          "biaffine_score: head and modifier row counts differ");
  require(head.cols() == params.dim() && mod.cols() == params.dim() &&
              params.weight.rows() == params.dim() + 1,
          "biaffine_score: dimension mismatch");
  const int n = static_cast<int>(head.rows()) - 1;
  // scores(i, j) = h_i^T W^T [m_j; 1]
  const Mat scores = head * (augment(mod) * params.weight).transpose();
  ArcScores out(n);
  for (int i = 0; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i != j) out.at(i, j) = scores(i, j);
    }
  }
  return out;
}

void biaffine_backward(const Mat& head, const Mat& mod,
                       const BiaffineParams& params,
                       std::span<const double> grad, BiaffineParams& dparams,
                       Mat& dhead, Mat& dmod) {
  const int n = static_cast<int>(head.rows()) - 1;
  const int d = params.dim();
  const Mat g = arc_grad_matrix(grad, n);
  const Mat maug = augment(mod);
  dparams.weight += maug.transpose() * g.transpose() * head;
  dhead += g * maug * params.weight;
  dmod += (g.transpose() * head * params.weight.transpose()).leftCols(d);
}

SibScores triaffine_score(const Mat& head, const Mat& sib, const Mat& mod,
                          const TriaffineParams& params) {
  const int d = params.dim();
  require(head.rows() == sib.rows() && head.rows() == mod.rows() &&
              head.rows() >= 1,
          "triaffine_score: representation row counts differ");
  require(head.cols() == d && sib.cols() == d && mod.cols() == d &&
              params.weight.cols() == d * (d + 1),
          "triaffine_score: dimension mismatch");
  const int n = static_cast<int>(head.rows()) - 1;
  const int a1 = d + 1;
  const Mat saug = augment(sib);
  const Mat maug = augment(mod);
  // Row i of `per_head` is T_i = sum_b h_ib W[:, b, :], flattened.
  const Mat per_head = head * head_major(params);
  SibScores out(n);
  for (int i = 0; i <= n; ++i) {
    const Eigen::Map<const Mat> t(per_head.row(i).data(), a1, a1);
    const Mat s = saug * t * maug.transpose();  // (k, j)
    for (int k = 1; k <= n; ++k) {
      for (int j = 1; j <= n; ++j) {
        if (SibScores::valid(i, k, j)) out.at(i, k, j) = s(k, j);
      }
    }
  }
  return out;
}

void triaffine_backward(const Mat& head, const Mat& sib, const Mat& mod,
                        const TriaffineParams& params,
                        std::span<const double> grad, TriaffineParams& dparams,
                        Mat& dhead, Mat& dsib, Mat& dmod) {
  const int d = params.dim();
  const int n = static_cast<int>(head.rows()) - 1;
  const int a1 = d + 1;
  require(grad.size() == static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1),
          "triaffine_backward: gradient size mismatch");
  const Mat saug = augment(sib);
  const Mat maug = augment(mod);
  const Mat w = head_major(params);
  const Mat per_head = head * w;

  Mat d_per_head = Mat::Zero(n + 1, a1 * a1);
  Mat dsaug = Mat::Zero(n + 1, a1);
  Mat dmaug = Mat::Zero(n + 1, a1);
  Mat g(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    g.setZero();
    bool any = false;
    for (int k = 1; k <= n; ++k) {
      for (int j = 1; j <= n; ++j) {
        if (!SibScores::valid(i, k, j)) continue;
        g(k, j) = grad[(i * (n + 1) + k) * (n + 1) + j];
        any = any || g(k, j) != 0.0;
      }
    }
    if (!any) continue;
    const Eigen::Map<const Mat> t(per_head.row(i).data(), a1, a1);
    const Mat dt = saug.transpose() * g * maug;
    d_per_head.row(i) = Eigen::Map<const Eigen::RowVectorXd>(dt.data(), a1 * a1);
    dsaug += g * maug * t.transpose();
    dmaug += g.transpose() * saug * t;
  }
  dhead += d_per_head * w.transpose();
  dsib += dsaug.leftCols(d);
  dmod += dmaug.leftCols(d);

  const Mat dw = head.transpose() * d_per_head;  // head-major layout
  for (int b = 0; b < d; ++b) {
    for (int a = 0; a < a1; ++a) {
      dparams.weight.block(a, b * a1, 1, a1) += dw.block(b, a * a1, 1, a1);
    }
  }
}

LabelScores label_score(const Mat& head, const Mat& mod,
                        const LabelParams& params) {
  const int d = params.dim();
  require(head.rows() == mod.rows() && head.cols() == d && mod.cols() == d,
          "label_score: dimension mismatch");
  const int n = static_cast<int>(head.rows()) - 1;
  const int L = params.num_labels();
  const Mat haug = augment(head);
  const Mat maug = augment(mod);
  LabelScores out(n, L);
  for (int l = 0; l < L; ++l) {
    const Eigen::Map<const Mat> u(params.weight.row(l).data(), d + 1, d + 1);
    const Mat s = haug * u.transpose() * maug.transpose();  // (i, j)
    for (int i = 0; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i != j) out.at(i, j, l) = s(i, j);
      }
    }
  }
  return out;
}

void label_backward(const Mat& head, const Mat& mod, const LabelParams& params,
                    std::span<const double> grad, LabelParams& dparams,
                    Mat& dhead, Mat& dmod) {
  const int d = params.dim();
  const int n = static_cast<int>(head.rows()) - 1;
  const int L = params.num_labels();
  require(grad.size() == static_cast<std::size_t>(n + 1) * (n + 1) * L,
          "label_backward: gradient size mismatch");
  const Mat haug = augment(head);
  const Mat maug = augment(mod);
  Mat dhaug = Mat::Zero(n + 1, d + 1);
  Mat dmaug = Mat::Zero(n + 1, d + 1);
  Mat g(n + 1, n + 1);
  for (int l = 0; l < L; ++l) {
    g.setZero();
    bool any = false;
    for (int i = 0; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        g(i, j) = grad[(i * (n + 1) + j) * L + l];
        any = any || g(i, j) != 0.0;
      }
    }
    if (!any) continue;
    const Eigen::Map<const Mat> u(params.weight.row(l).data(), d + 1, d + 1);
    const Mat du = maug.transpose() * g.transpose() * haug;
    dparams.weight.row(l) += Eigen::Map<const Eigen::RowVectorXd>(du.data(), du.size());
    dhaug += g * maug * u;
    dmaug += g.transpose() * haug * u.transpose();
  }
  dhead += dhaug.leftCols(d);
  dmod += dmaug.leftCols(d);
}

}  // namespace treecrf
