#pragma once

// Normalized RBF network: soft-KNN basis selection, training by ridge
// regression on the column-normalized Gaussian kernel, and argmax testing.

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgc/diagnostics.hpp"
#include "sgc/graph.hpp"
#include "sgc/indicator.hpp"
#include "sgc/numerics.hpp"

namespace sgc {

template <typename Scalar>
struct SknnResult {
  std::vector<Index> basis_indices;  // 0-based, ascending
  Vec<Scalar> confidences;           // T, in [0, 1]
  Scalar sigma_knn = 0;
};

struct SknnOptions {
  Index k = 20;
  double t = 0.9;
  std::optional<Index> basis_size;  // fixed-size mode: the r least confident samples
};

namespace detail {

inline void require_labels(std::span<const int> labels, Index n, int K) {
  if (static_cast<Index>(labels.size()) != n) {
    fail(ErrorKind::DimensionMismatch, "labels length " + std::to_string(labels.size()) + " != sample count " +
                                           std::to_string(n));
  }
  const auto counts = count_per_class(labels, K);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) fail(ErrorKind::EmptyClass, "class " + std::to_string(c + 1) + " has no samples");
  }
}

}  // namespace detail

template <typename DA>
SknnResult<typename DA::Scalar> sknn_select_basis(const Eigen::MatrixBase<DA>& A, std::span<const int> labels,
                                                  const SknnOptions& opt = {}) {
  using Scalar = typename DA::Scalar;
  const Index n = A.cols();
  const int K = class_count(labels);
  detail::require_labels(labels, n, K);
  if (!(opt.t > 0.0 && opt.t <= 1.0)) fail(ErrorKind::InvalidArgument, "sknn: t must lie in (0, 1]");
  if (opt.basis_size && (*opt.basis_size < 1 || *opt.basis_size > n)) {
    fail(ErrorKind::InvalidArgument, "sknn: basis size must lie in 1..n");
  }

  const KnnResult<Scalar> nn = knn_search(A, opt.k);
  SknnResult<Scalar> out;
  out.sigma_knn = nn.dists.sum() / static_cast<Scalar>(opt.k * n);
  if (!(out.sigma_knn > Scalar(0))) {
    fail(ErrorKind::NonPositiveSigma, "sknn: all neighbour distances are zero");
  }
  const auto W = normalized_gaussian_from_sq(Mat<Scalar>(nn.dists.array().square()), out.sigma_knn);

  out.confidences.setZero(n);
  for (Index j = 0; j < n; ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    for (Index i = 0; i < opt.k; ++i) {
      if (labels[static_cast<std::size_t>(nn.indices(i, j))] == y) out.confidences(j) += W.W_tilde(i, j);
    }
  }
  out.confidences = out.confidences.cwiseMin(Scalar(1));

  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return out.confidences(a) < out.confidences(b); });
  if (opt.basis_size) {
    for (Index i = 0; i < *opt.basis_size; ++i) chosen[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  } else {
    for (Index j = 0; j < n; ++j) chosen[static_cast<std::size_t>(j)] = out.confidences(j) < Scalar(opt.t) ? 1 : 0;
  }

  // Every class keeps at least its least confident sample.
  std::vector<char> covered(static_cast<std::size_t>(K), 0);
  for (Index j = 0; j < n; ++j) {
    if (chosen[static_cast<std::size_t>(j)]) covered[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)] - 1)] = 1;
  }
  for (const Index j : order) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(j)] - 1);
    if (!covered[c]) {
      covered[c] = 1;
      chosen[static_cast<std::size_t>(j)] = 1;
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (chosen[static_cast<std::size_t>(j)]) out.basis_indices.push_back(j);
  }
  return out;
}

template <typename Scalar>
struct NrbfnModel {
  Mat<Scalar> G;  // p x r basis
  std::vector<int> basis_labels;
  std::vector<Index> basis_indices;  // columns of the training matrix
  Scalar sigma = 0;
  Mat<Scalar> X;  // K x r
  Scalar lambda = 0;
  int class_count = 0;
  Index k = 20;
  double t = 0.9;
  Index training_size = 0;
  RiskReport<Scalar> training_diagnostics;

  Index dimension() const { return G.rows(); }
  Index basis_size() const { return G.cols(); }
};

struct NrbfnOptions {
  SknnOptions sknn;
};

/// Column-normalized kernel between the basis and the columns of B.
template <typename Scalar, typename DB>
Mat<Scalar> nrbfn_design(const NrbfnModel<Scalar>& model, const Eigen::MatrixBase<DB>& B) {
  if (B.rows() != model.dimension()) {
    fail(ErrorKind::DimensionMismatch, "nrbfn: expected " + std::to_string(model.dimension()) + " features, got " +
                                           std::to_string(B.rows()));
  }
  require_finite(B, "input data");
  return normalized_gaussian_from_sq(pairwise_sq_dists(model.G, B), model.sigma).W_tilde;
}

/// One model per lambda, sharing the basis and kernel.
template <typename DA>
std::vector<NrbfnModel<typename DA::Scalar>> nrbfn_train_path(const Eigen::MatrixBase<DA>& A,
                                                              std::span<const int> labels,
                                                              std::span<const typename DA::Scalar> lambdas,
                                                              const NrbfnOptions& opt = {}) {
  using Scalar = typename DA::Scalar;
  for (const Scalar lambda : lambdas) {
    if (!(lambda >= Scalar(0))) fail(ErrorKind::InvalidArgument, "nrbfn_train: lambda must be >= 0");
  }
  require_finite(A, "training data");
  const SknnResult<Scalar> sk = sknn_select_basis(A, labels, opt.sknn);

  NrbfnModel<Scalar> base;
  base.class_count = class_count(labels);
  base.k = opt.sknn.k;
  base.t = opt.sknn.t;
  base.training_size = A.cols();
  base.basis_indices = sk.basis_indices;
  base.G = A(Eigen::all, sk.basis_indices);
  for (const Index j : sk.basis_indices) base.basis_labels.push_back(labels[static_cast<std::size_t>(j)]);

  const Mat<Scalar> sq = pairwise_sq_dists(base.G, A);
  base.sigma = sq.array().sqrt().sum() / static_cast<Scalar>(sq.size());
  if (!(base.sigma > Scalar(0))) fail(ErrorKind::NonPositiveSigma, "nrbfn_train: basis coincides with the data");
  const Mat<Scalar> W = normalized_gaussian_from_sq(sq, base.sigma).W_tilde;
  const Mat<Scalar> F = to_indicator<Scalar>(labels, base.class_count);

  std::vector<NrbfnModel<Scalar>> out;
  for (const Scalar lambda : lambdas) {
    NrbfnModel<Scalar> model = base;
    model.lambda = lambda;
    try {
      model.X = ridge_solve(W, F, lambda * W.squaredNorm());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularSystem) throw;
      fail(ErrorKind::RankDeficient, std::string("nrbfn_train: ") + e.what());
    }
    model.training_diagnostics = risk_report(F, W, lambda, {}, &model.X);
    out.push_back(std::move(model));
  }
  return out;
}

template <typename DA>
NrbfnModel<typename DA::Scalar> nrbfn_train(const Eigen::MatrixBase<DA>& A, std::span<const int> labels,
                                            typename DA::Scalar lambda, const NrbfnOptions& opt = {}) {
  using Scalar = typename DA::Scalar;
  const Scalar grid[1] = {lambda};
  return std::move(nrbfn_train_path(A, labels, std::span<const Scalar>(grid), opt).front());
}

template <typename Scalar, typename DB>
Prediction<Scalar> nrbfn_predict(const NrbfnModel<Scalar>& model, const Eigen::MatrixBase<DB>& B) {
  Prediction<Scalar> out;
  out.scores = model.X * nrbfn_design(model, B);
  out.labels = argmax_labels(out.scores);
  return out;
}

}  // namespace sgc
