#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgc/numerics.hpp"

namespace sgc {

/// K x n one-hot matrix: column j has a 1 in row labels[j] - 1.
template <typename Scalar = double>
Mat<Scalar> to_indicator(std::span<const int> labels, int K) {
  if (K < 1) fail(ErrorKind::InvalidArgument, "to_indicator: K must be >= 1");
  Mat<Scalar> F = Mat<Scalar>::Zero(K, static_cast<Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int y = labels[j];
    if (y < 1 || y > K) {
      fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(y) + " at position " + std::to_string(j) +
                                           " outside 1.." + std::to_string(K));
    }
    F(y - 1, static_cast<Index>(j)) = Scalar(1);
  }
  return F;
}

/// Row index (1-based) of the largest entry of each column; ties go to the
/// smallest class index.
template <typename Derived>
std::vector<int> argmax_labels(const Eigen::MatrixBase<Derived>& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) {
    Index best = 0;
    for (Index k = 1; k < scores.rows(); ++k) {
      if (scores(k, j) > scores(best, j)) best = k;
    }
    out[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
  }
  return out;
}

template <typename Scalar>
struct Prediction {
  std::vector<int> labels;
  Mat<Scalar> scores;  // K x m, raw quasi-probabilities
};

/// Percentage of positions where predicted != truth.
inline double error_percent(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) fail(ErrorKind::DimensionMismatch, "error_percent: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace sgc
