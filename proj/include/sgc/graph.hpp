#pragma once

// Similarity graphs: Gaussian and linear-augmented kernels, column
// normalization, Laplacians, the (bipartite) ideal-graph check and the
// ideal-plus-noise decomposition used for perturbation bounds.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgc/numerics.hpp"

namespace sgc {

enum class SimilarityKind { LinearAugmented, Gaussian };

template <typename Scalar>
struct SimilarityMatrix {
  Mat<Scalar> W;
  SimilarityKind kind = SimilarityKind::Gaussian;
  Scalar sigma = Scalar(0);                      // gaussian only
  std::optional<std::vector<int>> basis_labels;  // bipartite case
};

/// Column-stochastic similarity W * diag(1^T W)^{-1}.
template <typename Scalar>
struct NormalizedSimilarity {
  Mat<Scalar> W_tilde;
  Vec<Scalar> column_sums;  // sums of the unnormalized columns
};

template <typename Scalar>
struct IdealCheck {
  bool ideal = true;
  Scalar max_violation = Scalar(0);  // largest between-class entry
  Index row = -1;
  Index col = -1;
};

template <typename Scalar>
struct Idealization {
  NormalizedSimilarity<Scalar> ideal;
  Mat<Scalar> delta;  // noisy - ideal
};

template <typename Scalar>
struct PerturbationStats {
  Scalar xi = 0;     // ||pinv(W)||_2 ||dW||_2
  Scalar delta = 0;  // ||dW||_F / ||W||_F
  Scalar n_rho = 1;
  Scalar r_rho = 1;
  bool condition_met = false;  // xi < 1 / n_rho
  Scalar error_bound = std::numeric_limits<Scalar>::infinity();
  Scalar risk_bound_factor = std::numeric_limits<Scalar>::infinity();
};

/// Number of classes, i.e. the largest label (labels are 1-based).
inline int class_count(std::span<const int> labels) {
  int k = 0;
  for (int y : labels) k = std::max(k, y);
  return k;
}

/// Per-class sample counts n_1..n_K.
inline std::vector<Index> count_per_class(std::span<const int> labels, int K) {
  std::vector<Index> counts(static_cast<std::size_t>(K), 0);
  for (int y : labels) {
    if (y < 1 || y > K) fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(y) + " outside 1.." + std::to_string(K));
    ++counts[static_cast<std::size_t>(y - 1)];
  }
  return counts;
}

/// W_ij = exp(-Q_ij^2 / (2 sigma^2)) for a matrix of (unsquared) distances.
template <typename DQ>
SimilarityMatrix<typename DQ::Scalar> gaussian_kernel(const Eigen::MatrixBase<DQ>& Q, typename DQ::Scalar sigma) {
  using Scalar = typename DQ::Scalar;
  if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma))) {
    fail(ErrorKind::NonPositiveSigma, "gaussian_kernel: sigma must be positive and finite");
  }
  require_finite(Q, "distance matrix");
  if ((Q.array() < Scalar(0)).any()) fail(ErrorKind::InvalidArgument, "gaussian_kernel: negative distance");
  SimilarityMatrix<Scalar> out;
  out.kind = SimilarityKind::Gaussian;
  out.sigma = sigma;
  const Scalar inv = Scalar(1) / (Scalar(2) * sigma * sigma);
  out.W = (-(Q.array().square()) * inv).exp().matrix();
  return out;
}

template <typename Scalar>
NormalizedSimilarity<Scalar> column_normalize(const SimilarityMatrix<Scalar>& sim) {
  const Mat<Scalar>& W = sim.W;
  NormalizedSimilarity<Scalar> out;
  out.column_sums = W.colwise().sum().transpose();
  for (Index j = 0; j < W.cols(); ++j) {
    const Scalar s = out.column_sums(j);
    if (!(s > Scalar(0)) || !std::isfinite(static_cast<double>(s))) {
      fail(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " has non-positive sum");
    }
  }
  out.W_tilde = W * out.column_sums.cwiseInverse().asDiagonal();
  return out;
}

/// Column-normalized Gaussian kernel computed from SQUARED distances in a
/// shifted log domain: each column is scaled by exp(min_i sq_ij / (2 sigma^2))
/// before normalization, which leaves W~ unchanged but keeps the largest entry
/// of every column at 1. column_sums hold the unshifted sums (may underflow).
/// A column whose distances are all +Inf becomes one-hot at its first entry.
template <typename DS>
NormalizedSimilarity<typename DS::Scalar> normalized_gaussian_from_sq(const Eigen::MatrixBase<DS>& sq,
                                                                      typename DS::Scalar sigma) {
  using Scalar = typename DS::Scalar;
  if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma))) {
    fail(ErrorKind::NonPositiveSigma, "sigma must be positive and finite");
  }
  const Scalar inv = Scalar(1) / (Scalar(2) * sigma * sigma);
  NormalizedSimilarity<Scalar> out;
  out.W_tilde.resize(sq.rows(), sq.cols());
  out.column_sums.resize(sq.cols());
  for (Index j = 0; j < sq.cols(); ++j) {
    Index arg = 0;
    const Scalar m = sq.col(j).minCoeff(&arg);
    if (!std::isfinite(static_cast<double>(m))) {
      out.W_tilde.col(j).setZero();
      out.W_tilde(arg, j) = Scalar(1);
      out.column_sums(j) = Scalar(0);
      continue;
    }
    auto col = out.W_tilde.col(j);
    col = (-(sq.col(j).array() - m) * inv).exp().matrix();
    const Scalar s = col.sum();
    col /= s;
    out.column_sums(j) = s * std::exp(-m * inv);
  }
  return out;
}

template <typename Scalar>
struct LinearAugmented {
  SimilarityMatrix<Scalar> similarity;
  Scalar beta = 0;
};

/// W = A^T A + beta with beta = -min_ij (A^T A)_ij, for mean-removed A.
template <typename DA>
LinearAugmented<typename DA::Scalar> linear_augmented_similarity(const Eigen::MatrixBase<DA>& A) {
  using Scalar = typename DA::Scalar;
  require_finite(A, "data matrix");
  const Scalar fro = A.norm();
  if (A.rowwise().sum().norm() > Scalar(1e-8) * fro) {
    fail(ErrorKind::NotMeanRemoved, "linear_augmented_similarity: A 1 != 0");
  }
  Mat<Scalar> gram = A.transpose() * A;
  const Scalar mn = gram.minCoeff();
  if (!(mn < Scalar(0))) {
    fail(ErrorKind::DegenerateData, "linear_augmented_similarity: min (A^T A) >= 0, data is all zero");
  }
  LinearAugmented<Scalar> out;
  out.beta = -mn;
  out.similarity.kind = SimilarityKind::LinearAugmented;
  out.similarity.W = (gram.array() + out.beta).matrix();
  return out;
}

/// A~ = [sqrt(beta) 1^T; A].
template <typename DA>
Mat<typename DA::Scalar> augment(const Eigen::MatrixBase<DA>& A, typename DA::Scalar beta) {
  using Scalar = typename DA::Scalar;
  Mat<Scalar> out(A.rows() + 1, A.cols());
  out.row(0).setConstant(std::sqrt(beta));
  out.bottomRows(A.rows()) = A;
  return out;
}

/// L = diag(1^T W) - W for a square, symmetric, nonnegative W.
template <typename DW>
Mat<typename DW::Scalar> laplacian(const Eigen::MatrixBase<DW>& W) {
  using Scalar = typename DW::Scalar;
  if (W.rows() != W.cols()) fail(ErrorKind::NotSquare, "laplacian: W is not square");
  require_finite(W, "similarity matrix");
  const Scalar scale = std::max(Scalar(1), W.cwiseAbs().maxCoeff());
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
    fail(ErrorKind::NotSymmetric, "laplacian: W is not symmetric");
  }
  if ((W.array() < Scalar(0)).any()) fail(ErrorKind::InvalidArgument, "laplacian: W has negative entries");
  Mat<Scalar> L = -W;
  L.diagonal() += W.colwise().sum().transpose();
  return L;
}

/// True iff every W_ij with basis_labels[i] != labels[j] is <= tol * max(W).
template <typename DW>
IdealCheck<typename DW::Scalar> check_ideal_condition(const Eigen::MatrixBase<DW>& W, std::span<const int> labels,
                                                      std::span<const int> basis_labels,
                                                      typename DW::Scalar tol = 1e-10) {
  using Scalar = typename DW::Scalar;
  if (static_cast<Index>(labels.size()) != W.cols() || static_cast<Index>(basis_labels.size()) != W.rows()) {
    fail(ErrorKind::DimensionMismatch, "check_ideal_condition: label lengths do not match W");
  }
  IdealCheck<Scalar> out;
  const Scalar threshold = tol * (W.size() > 0 ? W.cwiseAbs().maxCoeff() : Scalar(0));
  for (Index j = 0; j < W.cols(); ++j) {
    for (Index i = 0; i < W.rows(); ++i) {
      if (basis_labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
      if (out.row < 0 || W(i, j) > out.max_violation) {
        out.max_violation = W(i, j);
        out.row = i;
        out.col = j;
      }
    }
  }
  out.ideal = out.max_violation <= threshold;
  return out;
}

/// Zero the between-class entries of a noisy normalized similarity and
/// renormalize each column; the residual is the noise dW.
template <typename DW>
Idealization<typename DW::Scalar> idealize(const Eigen::MatrixBase<DW>& W_noisy, std::span<const int> labels,
                                           std::span<const int> basis_labels) {
  using Scalar = typename DW::Scalar;
  if (static_cast<Index>(labels.size()) != W_noisy.cols() ||
      static_cast<Index>(basis_labels.size()) != W_noisy.rows()) {
    fail(ErrorKind::DimensionMismatch, "idealize: label lengths do not match W");
  }
  Idealization<Scalar> out;
  Mat<Scalar>& Wi = out.ideal.W_tilde;
  Wi = Mat<Scalar>::Zero(W_noisy.rows(), W_noisy.cols());
  out.ideal.column_sums = Vec<Scalar>::Ones(W_noisy.cols());
  for (Index j = 0; j < W_noisy.cols(); ++j) {
    Scalar mass = 0;
    for (Index i = 0; i < W_noisy.rows(); ++i) {
      if (basis_labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) mass += W_noisy(i, j);
    }
    if (!(mass > Scalar(0))) {
      fail(ErrorKind::OrphanColumn, "idealize: column " + std::to_string(j) + " has no within-class mass");
    }
    for (Index i = 0; i < W_noisy.rows(); ++i) {
      if (basis_labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        Wi(i, j) = W_noisy(i, j) / mass;
      }
    }
  }
  out.delta = W_noisy - Wi;
  return out;
}

template <typename DW, typename DD>
PerturbationStats<typename DW::Scalar> perturbation_stats(const Eigen::MatrixBase<DW>& W_ideal,
                                                          const Eigen::MatrixBase<DD>& delta,
                                                          std::span<const Index> class_counts,
                                                          std::span<const Index> basis_counts) {
  using Scalar = typename DW::Scalar;
  if (W_ideal.rows() != delta.rows() || W_ideal.cols() != delta.cols()) {
    fail(ErrorKind::DimensionMismatch, "perturbation_stats: W and dW differ in shape");
  }
  if (class_counts.empty() || basis_counts.empty()) {
    fail(ErrorKind::InvalidArgument, "perturbation_stats: empty class or basis counts");
  }
  const ThinSvd<Scalar> svd = thin_svd(W_ideal);
  const Vec<Scalar>& s = svd.singular_values;
  const Scalar smin = s.size() == W_ideal.rows() ? s(s.size() - 1) : Scalar(0);
  if (!(smin > Scalar(1e-12))) {
    fail(ErrorKind::RankDeficient, "perturbation_stats: ideal W~ is not of full row rank");
  }
  auto ratio = [](std::span<const Index> c) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    if (*lo < 1) fail(ErrorKind::InvalidArgument, "perturbation_stats: counts must be >= 1");
    return std::sqrt(static_cast<Scalar>(*hi) / static_cast<Scalar>(*lo));
  };

  PerturbationStats<Scalar> out;
  out.xi = spectral_norm(delta) / smin;
  out.delta = delta.norm() / W_ideal.norm();
  out.n_rho = ratio(class_counts);
  out.r_rho = ratio(basis_counts);
  out.condition_met = out.xi < Scalar(1) / out.n_rho;
  if (out.condition_met) {
    const Scalar gap = Scalar(1) - out.n_rho * out.xi;
    out.error_bound = (out.n_rho * out.n_rho * out.xi * out.xi) / (gap * gap) + Scalar(1);
    const Scalar q = (Scalar(1) + out.r_rho * out.xi) / gap;
    out.risk_bound_factor = (Scalar(1) + out.delta) * (Scalar(1) + out.delta) * q * q;
  }
  return out;
}

}  // namespace sgc
