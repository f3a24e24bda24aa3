#pragma once

// Dense linear-algebra primitives shared by every classifier and diagnostic:
// thin SVD, ridge solve, pairwise squared distances and exact kNN search.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgc/errors.hpp"

namespace sgc {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using IndexMat = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Number of worker threads for the column-parallel loops. Read once from
/// SGC_NUM_THREADS; defaults to 1. Work is always split into fixed-width
/// column blocks so results do not depend on this value.
inline int thread_count() {
  static const int n = [] {
    const char* env = std::getenv("SGC_NUM_THREADS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return v > 0 ? v : 1;
  }();
  return n;
}

inline constexpr Index kColumnBlock = 256;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
  if (m.size() == 0) fail(ErrorKind::InvalidArgument, what + " is empty");
  if (!m.allFinite()) fail(ErrorKind::NonFiniteInput, what + " contains NaN or Inf");
}

// ---------------------------------------------------------------------------
// Thin SVD

/// M = U * diag(singular_values) * V with U (p x m) and V (m x n) having
/// orthonormal columns / rows respectively, m = min(p, n). V is stored with
/// the right singular vectors as ROWS.
template <typename Scalar>
struct ThinSvd {
  Mat<Scalar> U;
  Vec<Scalar> singular_values;
  Mat<Scalar> V;

  /// Number of singular values above rel_tol * sigma_1.
  Index rank(Scalar rel_tol = Scalar(1e-12)) const {
    if (singular_values.size() == 0 || singular_values(0) == Scalar(0)) return 0;
    const Scalar cut = rel_tol * singular_values(0);
    return (singular_values.array() > cut).count();
  }
};

template <typename Derived>
ThinSvd<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_finite(m, "thin_svd input");
  Eigen::BDCSVD<Mat<Scalar>> svd(m.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "SVD iteration did not converge");
  }
  ThinSvd<Scalar> out;
  out.U = svd.matrixU();
  out.singular_values = svd.singularValues();
  out.V = svd.matrixV().transpose();
  return out;
}

/// Spectral norm via the largest singular value.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  if (m.isZero(0)) return Scalar(0);
  Eigen::BDCSVD<Mat<Scalar>> svd(m.derived());
  if (svd.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "SVD iteration did not converge");
  }
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Ridge solve: argmin_D ||F - D A||_F^2 + lambda' ||D||_F^2

struct RidgeSolveInfo {
  bool used_svd = false;
  double rcond = 0.0;  // reciprocal condition of A A^T + lambda' I (estimate)
};

inline constexpr double kRidgeSvdFallbackRcond = 1e-8;
inline constexpr double kRidgeSingularRcond = 1e-14;

/// D = F A^T (A A^T + lambda' I)^{-1}. Cholesky on the Gram system; falls back
/// to the SVD form F V^T diag(s / (s^2 + lambda')) U^T when the Gram matrix is
/// ill-conditioned (rcond < 1e-8). With lambda' = 0 a Gram rcond below 1e-14
/// (or r > n) is a SingularSystem error.
template <typename DA, typename DF>
Mat<typename DA::Scalar> ridge_solve(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DF>& F,
                                     typename DA::Scalar lambda_prime, RidgeSolveInfo* info = nullptr) {
  using Scalar = typename DA::Scalar;
  if (A.cols() != F.cols()) {
    fail(ErrorKind::DimensionMismatch, "ridge_solve: A has " + std::to_string(A.cols()) +
                                           " columns but F has " + std::to_string(F.cols()));
  }
  if (!(lambda_prime >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda_prime))) {
    fail(ErrorKind::InvalidArgument, "ridge_solve: lambda' must be finite and >= 0");
  }
  require_finite(A, "ridge_solve design matrix");
  require_finite(F, "ridge_solve target matrix");

  const Index r = A.rows();
  RidgeSolveInfo local;

  if (lambda_prime > Scalar(0) || r <= A.cols()) {
    Mat<Scalar> gram = A * A.transpose();
    gram.diagonal().array() += lambda_prime;
    Eigen::LLT<Mat<Scalar>> llt(gram);
    if (llt.info() == Eigen::Success) {
      local.rcond = static_cast<double>(llt.rcond());
      if (local.rcond >= kRidgeSvdFallbackRcond) {
        if (info != nullptr) *info = local;
        Mat<Scalar> rhs = A * F.transpose();
        return llt.solve(rhs).transpose();
      }
    }
  }

  // SVD route.
  local.used_svd = true;
  const ThinSvd<Scalar> svd = thin_svd(A);
  const Vec<Scalar>& s = svd.singular_values;
  const Scalar smax = s.size() > 0 ? s(0) : Scalar(0);
  const Scalar smin = s.size() > 0 ? s(s.size() - 1) : Scalar(0);
  const Scalar smax2 = smax * smax;
  local.rcond = smax2 + lambda_prime > Scalar(0)
                    ? static_cast<double>((smin * smin + lambda_prime) / (smax2 + lambda_prime))
                    : 0.0;
  if (lambda_prime == Scalar(0)) {
    if (r > A.cols() || local.rcond < kRidgeSingularRcond) {
      fail(ErrorKind::SingularSystem, "ridge_solve: A A^T is numerically singular (rcond " +
                                          std::to_string(local.rcond) + ") and lambda' = 0");
    }
  }
  Vec<Scalar> shrink(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const Scalar denom = s(i) * s(i) + lambda_prime;
    shrink(i) = denom > Scalar(0) ? s(i) / denom : Scalar(0);
  }
  if (info != nullptr) *info = local;
  return (F * svd.V.transpose()) * shrink.asDiagonal() * svd.U.transpose();
}

// ---------------------------------------------------------------------------
// Distances and kNN

namespace detail {

/// Squared distances between columns of X and Y after translating both by the
/// same offset. The translation reduces cancellation in |x|^2 + |y|^2 - 2x.y.
template <typename Scalar, typename DX, typename DY>
Mat<Scalar> sq_dists_centered(const Eigen::MatrixBase<DX>& Xc, const Vec<Scalar>& x_sq,
                              const Eigen::MatrixBase<DY>& Yc) {
  Mat<Scalar> out = Scalar(-2) * (Xc.transpose() * Yc);
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> y_sq = Yc.colwise().squaredNorm();
  out.colwise() += x_sq;
  out.rowwise() += y_sq;
  return out.cwiseMax(Scalar(0));
}

}  // namespace detail

/// Entry (i, j) = ||X_i - Y_j||^2, with negative round-off clamped to 0.
template <typename DX, typename DY>
Mat<typename DX::Scalar> pairwise_sq_dists(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y) {
  using Scalar = typename DX::Scalar;
  if (X.rows() != Y.rows()) {
    fail(ErrorKind::DimensionMismatch, "pairwise_sq_dists: row counts differ (" + std::to_string(X.rows()) +
                                           " vs " + std::to_string(Y.rows()) + ")");
  }
  const Vec<Scalar> offset = X.rowwise().mean();
  const Mat<Scalar> Xc = X.colwise() - offset;
  const Vec<Scalar> x_sq = Xc.colwise().squaredNorm().transpose();
  const Index n = Y.cols();
  Mat<Scalar> out(X.cols(), n);
  const Index blocks = (n + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index b = 0; b < blocks; ++b) {
    const Index j0 = b * kColumnBlock;
    const Index w = std::min(kColumnBlock, n - j0);
    const Mat<Scalar> Yc = Y.middleCols(j0, w).colwise() - offset;
    out.middleCols(j0, w) = detail::sq_dists_centered<Scalar>(Xc, x_sq, Yc);
  }
  return out;
}

template <typename Scalar>
struct KnnResult {
  IndexMat indices;  // k x n, column j lists neighbours of sample j
  Mat<Scalar> dists;  // k x n, Euclidean distances (not squared)
};

/// Exact k nearest OTHER samples of every column of A (self excluded),
/// ordered by ascending distance with ties broken by lower index.
template <typename DA>
KnnResult<typename DA::Scalar> knn_search(const Eigen::MatrixBase<DA>& A, Index k) {
  using Scalar = typename DA::Scalar;
  const Index n = A.cols();
  if (k < 1) fail(ErrorKind::InvalidArgument, "knn_search: k must be >= 1");
  if (k >= n) {
    fail(ErrorKind::KTooLarge, "knn_search: k = " + std::to_string(k) + " must be smaller than n = " +
                                   std::to_string(n));
  }
  require_finite(A, "knn_search data");

  KnnResult<Scalar> out;
  out.indices.resize(k, n);
  out.dists.resize(k, n);

  const Vec<Scalar> offset = A.rowwise().mean();
  const Mat<Scalar> Ac = A.colwise() - offset;
  const Vec<Scalar> a_sq = Ac.colwise().squaredNorm().transpose();
  const Index blocks = (n + kColumnBlock - 1) / kColumnBlock;

#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index b = 0; b < blocks; ++b) {
    const Index j0 = b * kColumnBlock;
    const Index w = std::min(kColumnBlock, n - j0);
    const Mat<Scalar> sq = detail::sq_dists_centered<Scalar>(Ac, a_sq, Ac.middleCols(j0, w));
    std::vector<Index> cand(static_cast<std::size_t>(n - 1));
    for (Index c = 0; c < w; ++c) {
      const Index j = j0 + c;
      std::size_t pos = 0;
      for (Index i = 0; i < n; ++i) {
        if (i != j) cand[pos++] = i;
      }
      auto closer = [&](Index a, Index bb) {
        const Scalar da = sq(a, c);
        const Scalar db = sq(bb, c);
        return da < db || (da == db && a < bb);
      };
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), closer);
      for (Index i = 0; i < k; ++i) {
        const Index nb = cand[static_cast<std::size_t>(i)];
        out.indices(i, j) = nb;
        out.dists(i, j) = std::sqrt(sq(nb, c));
      }
    }
  }
  return out;
}

/// Exact k nearest columns of `ref` for every column of `queries`, same
/// ordering and tie rule as knn_search (no self exclusion).
template <typename DR, typename DQ>
KnnResult<typename DR::Scalar> knn_query(const Eigen::MatrixBase<DR>& ref, const Eigen::MatrixBase<DQ>& queries,
                                         Index k) {
  using Scalar = typename DR::Scalar;
  const Index n = ref.cols();
  if (k < 1) fail(ErrorKind::InvalidArgument, "knn_query: k must be >= 1");
  if (k > n) {
    fail(ErrorKind::KTooLarge, "knn_query: k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                   " reference samples");
  }
  const Mat<Scalar> sq = pairwise_sq_dists(ref, queries);
  KnnResult<Scalar> out;
  out.indices.resize(k, queries.cols());
  out.dists.resize(k, queries.cols());
  std::vector<Index> cand(static_cast<std::size_t>(n));
  for (Index j = 0; j < queries.cols(); ++j) {
    std::iota(cand.begin(), cand.end(), Index(0));
    auto closer = [&](Index a, Index b) { return sq(a, j) < sq(b, j) || (sq(a, j) == sq(b, j) && a < b); };
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), closer);
    for (Index i = 0; i < k; ++i) {
      out.indices(i, j) = cand[static_cast<std::size_t>(i)];
      out.dists(i, j) = std::sqrt(sq(cand[static_cast<std::size_t>(i)], j));
    }
  }
  return out;
}

}  // namespace sgc
