#pragma once

// Linear regression for classification: ridge regression of the one-hot
// targets on the mean-removed data augmented with a row of ones, then argmax.

#include <set>
#include <span>
#include <string>

#include "sgc/graph.hpp"
#include "sgc/indicator.hpp"
#include "sgc/numerics.hpp"

namespace sgc {

template <typename Scalar>
struct LrcModel {
  Mat<Scalar> D;     // K x (p + 1); column 0 multiplies the constant row
  Vec<Scalar> mean;  // training mean, removed from every input
  Scalar lambda = 0;
  int class_count = 0;

  Index dimension() const { return mean.size(); }
};

/// [1^T; B - mean] for the stored training mean.
template <typename Scalar, typename DB>
Mat<Scalar> lrc_design(const LrcModel<Scalar>& model, const Eigen::MatrixBase<DB>& B) {
  if (B.rows() != model.dimension()) {
    fail(ErrorKind::DimensionMismatch, "lrc: expected " + std::to_string(model.dimension()) + " features, got " +
                                           std::to_string(B.rows()));
  }
  return augment(Mat<Scalar>(B.colwise() - model.mean), Scalar(1));
}

/// Trains on columns of A. lambda' = lambda * ||A~||_F^2.
template <typename DA>
LrcModel<typename DA::Scalar> lrc_train(const Eigen::MatrixBase<DA>& A, std::span<const int> labels,
                                        typename DA::Scalar lambda) {
  using Scalar = typename DA::Scalar;
  if (static_cast<Index>(labels.size()) != A.cols()) {
    fail(ErrorKind::DimensionMismatch, "lrc_train: labels do not match sample count");
  }
  if (A.cols() < 2) fail(ErrorKind::TooFewSamples, "lrc_train: need at least 2 samples");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    fail(ErrorKind::EmptyClass, "lrc_train: need at least 2 classes");
  }
  if (!(lambda >= Scalar(0))) fail(ErrorKind::InvalidArgument, "lrc_train: lambda must be >= 0");
  require_finite(A, "training data");

  LrcModel<Scalar> model;
  model.lambda = lambda;
  model.class_count = class_count(labels);
  model.mean = A.rowwise().mean();
  const Mat<Scalar> design = lrc_design(model, A);
  const Mat<Scalar> F = to_indicator<Scalar>(labels, model.class_count);
  model.D = ridge_solve(design, F, lambda * design.squaredNorm());
  return model;
}

template <typename Scalar, typename DB>
Prediction<Scalar> lrc_predict(const LrcModel<Scalar>& model, const Eigen::MatrixBase<DB>& B) {
  Prediction<Scalar> out;
  out.scores = model.D * lrc_design(model, B);
  out.labels = argmax_labels(out.scores);
  return out;
}

}  // namespace sgc
