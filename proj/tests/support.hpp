#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testing {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Mat uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> ud(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = ud(rng);
  return m;
}

inline Mat one_hot(const std::vector<int>& labels, int K) {
  Mat F = Mat::Zero(K, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) F(labels[j] - 1, static_cast<Eigen::Index>(j)) = 1.0;
  return F;
}

/// Ridge solution from a Jacobi SVD: F V^T diag(s / (s^2 + lp)) U^T.
inline Mat ridge_oracle(const Mat& A, const Mat& F, double lp) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec s = svd.singularValues();
  Vec shrink(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) shrink(i) = s(i) > 1e-14 * s(0) ? s(i) / (s(i) * s(i) + lp) : 0.0;
  return F * svd.matrixV() * shrink.asDiagonal() * svd.matrixU().transpose();
}

/// Labels 1..K with n_k samples each, in class order.
inline std::vector<int> block_labels(const std::vector<int>& counts) {
  std::vector<int> y;
  for (std::size_t k = 0; k < counts.size(); ++k) y.insert(y.end(), static_cast<std::size_t>(counts[k]), static_cast<int>(k + 1));
  return y;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

inline double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace testing

namespace testing {

/// Mean-removed data whose linear-augmented similarity is ideal: K equal
/// classes placed at the vertices of a centered simplex, each spread in
/// its own pair of extra coordinates with zero class mean.
inline Mat ideal_lrc_data(int K, int per_class, std::mt19937_64& rng, double spread = 0.3) {
  // simplex vertices e_k - 1/K expressed in an orthonormal basis of the sum-zero plane
  const Mat C = Mat::Identity(K, K) - Mat::Constant(K, K, 1.0 / K);
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeThinU);
  const Mat vertices = svd.matrixU().leftCols(K - 1).transpose() * C;
  const int p = (K - 1) + 2 * K;
  Mat A = Mat::Zero(p, K * per_class);
  std::uniform_real_distribution<double> ud(-spread, spread);
  for (int k = 0; k < K; ++k) {
    Mat w(2, per_class);
    for (int j = 0; j < per_class; ++j) w.col(j) << ud(rng), ud(rng);
    w = (w.colwise() - w.rowwise().mean()).eval();
    for (int j = 0; j < per_class; ++j) {
      const int c = k * per_class + j;
      A.col(c).head(K - 1) = vertices.col(k);
      A.block(K - 1 + 2 * k, c, 2, 1) = w.col(j);
    }
  }
  return A;
}

}  // namespace testing

namespace testing {

enum class BlockKind { Random, OneHot, Uniform, Even, Dominant };

/// Column-stochastic W~ that is exactly block-diagonal by class: basis rows
/// and sample columns both in class order, r_k rows and n_k columns per class.
struct BlockInstance {
  Mat W;
  std::vector<int> labels;
  std::vector<int> basis_labels;
  std::vector<Eigen::Index> n_k;
  std::vector<Eigen::Index> r_k;
};

inline Mat block_of(int r, int n, BlockKind kind, std::mt19937_64& rng) {
  Mat b(r, n);
  switch (kind) {
    case BlockKind::Random:
      b = uniform(r, n, rng, 0.05, 1.0);
      break;
    case BlockKind::OneHot:
      b.setZero();
      for (int j = 0; j < n; ++j) b(j % r, j) = 1.0;
      break;
    case BlockKind::Uniform:
      b.setConstant(1.0);
      break;
    case BlockKind::Even: {
      Mat P = uniform(r, n, rng, -1.0, 1.0);
      P = (P.colwise() - P.rowwise().mean()).eval();
      P = (P.rowwise() - P.colwise().mean()).eval();
      const double m = P.cwiseAbs().maxCoeff();
      b = Mat::Constant(r, n, 1.0 / r);
      if (m > 0) b += P * (0.5 / (r * m));
      return b;  // row sums n / r, column sums 1
    }
    case BlockKind::Dominant:
      b = uniform(r, n, rng, 0.0, 0.3 / r);
      for (int j = 0; j < n; ++j) b(j % r, j) += 0.7;
      break;
  }
  return b * b.colwise().sum().cwiseInverse().asDiagonal();
}

inline BlockInstance ideal_block(const std::vector<int>& nk, const std::vector<int>& rk, BlockKind kind,
                                 std::mt19937_64& rng) {
  BlockInstance out;
  int n = 0, r = 0;
  for (std::size_t k = 0; k < nk.size(); ++k) {
    n += nk[k];
    r += rk[k];
    out.n_k.push_back(nk[k]);
    out.r_k.push_back(rk[k]);
  }
  out.W = Mat::Zero(r, n);
  int row = 0, col = 0;
  for (std::size_t k = 0; k < nk.size(); ++k) {
    out.W.block(row, col, rk[k], nk[k]) = block_of(rk[k], nk[k], kind, rng);
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(nk[k]), static_cast<int>(k + 1));
    out.basis_labels.insert(out.basis_labels.end(), static_cast<std::size_t>(rk[k]), static_cast<int>(k + 1));
    row += rk[k];
    col += nk[k];
  }
  return out;
}

/// Random class shape: K classes, 1 <= r_k <= n_k, sum r_k <= r_max, sum n_k <= n_max.
inline void random_shape(std::mt19937_64& rng, int K_max, int r_max, int n_max, std::vector<int>& nk,
                         std::vector<int>& rk) {
  std::uniform_int_distribution<int> kd(2, K_max);
  const int K = kd(rng);
  nk.assign(static_cast<std::size_t>(K), 0);
  rk.assign(static_cast<std::size_t>(K), 1);
  int budget_r = r_max - K;
  for (int k = 0; k < K && budget_r > 0; ++k) {
    std::uniform_int_distribution<int> rd(0, std::min(budget_r, 2));
    const int extra = rd(rng);
    rk[static_cast<std::size_t>(k)] += extra;
    budget_r -= extra;
  }
  const int per = n_max / K;
  for (int k = 0; k < K; ++k) {
    std::uniform_int_distribution<int> nd(rk[static_cast<std::size_t>(k)] + 1, std::max(rk[static_cast<std::size_t>(k)] + 1, per));
    nk[static_cast<std::size_t>(k)] = nd(rng);
  }
}

}  // namespace testing
