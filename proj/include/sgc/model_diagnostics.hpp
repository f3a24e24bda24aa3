#pragma once

// Risk reports for trained models, with the ideal-case and perturbation
// bound checks evaluated on the model's own normalized kernel.

#include <optional>
#include <span>
#include <vector>

#include "sgc/diagnostics.hpp"
#include "sgc/graph.hpp"
#include "sgc/lrc.hpp"
#include "sgc/nrbfn.hpp"

namespace sgc {

/// A bound with its measured value; slack = bound - measured.
template <typename Scalar>
struct BoundCheck {
  Scalar measured = 0;
  Scalar bound = 0;
  Scalar slack = 0;
  bool holds = false;
};

template <typename Scalar>
BoundCheck<Scalar> upper_check(Scalar measured, Scalar bound, Scalar rel_tol = Scalar(0)) {
  BoundCheck<Scalar> c{measured, bound, bound - measured, false};
  c.holds = measured <= bound + rel_tol * std::abs(bound);
  return c;
}

template <typename Scalar>
struct PerturbationCheck {
  PerturbationStats<Scalar> stats;
  Scalar ideal_gamma = 0;  // spectral risk of the idealized W~ at lambda = 0
  BoundCheck<Scalar> epsilon;
  BoundCheck<Scalar> gamma;
};

template <typename Scalar>
struct NrbfnDiagnosis {
  RiskReport<Scalar> report;
  IdealCheck<Scalar> ideal;
  std::vector<Index> class_counts;
  std::vector<Index> basis_counts;
  RiskBounds<double> ideal_bounds;
  bool ideal_bounds_hold = false;  // only meaningful when ideal.ideal
  std::optional<PerturbationCheck<Scalar>> perturbation;
  std::string perturbation_note;  // why the perturbation check is absent or vacuous
};

/// Noisy-versus-ideal comparison for a normalized kernel W~' = W~ + dW, at
/// lambda = 0. The bounds are only claimed when xi < 1 / n_rho.
template <typename DW>
PerturbationCheck<typename DW::Scalar> perturbation_check(const Eigen::MatrixBase<DW>& W_noisy,
                                                          std::span<const int> labels,
                                                          std::span<const int> basis_labels) {
  using Scalar = typename DW::Scalar;
  const int K = std::max(class_count(labels), class_count(basis_labels));
  const auto nk = count_per_class(labels, K);
  const auto rk = count_per_class(basis_labels, K);
  const auto split = idealize(W_noisy, labels, basis_labels);
  const Mat<Scalar> F = to_indicator<Scalar>(labels, K);

  PerturbationCheck<Scalar> pc;
  pc.stats = perturbation_stats(split.ideal.W_tilde, split.delta, nk, rk);
  pc.ideal_gamma = risk_report(F, split.ideal.W_tilde, Scalar(0)).gamma;
  const auto noisy = risk_report(F, W_noisy, Scalar(0));
  pc.epsilon = upper_check(noisy.epsilon, pc.stats.error_bound);
  pc.gamma = upper_check(noisy.gamma, pc.ideal_gamma * pc.stats.risk_bound_factor);
  return pc;
}

template <typename Scalar, typename DB>
NrbfnDiagnosis<Scalar> nrbfn_risk_report(const NrbfnModel<Scalar>& model, const Eigen::MatrixBase<DB>& B,
                                         std::span<const int> labels, RiskOptions options = {}) {
  const Mat<Scalar> W = nrbfn_design(model, B);
  const Mat<Scalar> F = to_indicator<Scalar>(labels, model.class_count);
  NrbfnDiagnosis<Scalar> d;
  d.report = risk_report(F, W, model.lambda, options);
  d.ideal = check_ideal_condition(W, labels, model.basis_labels, Scalar(1e-10));
  d.class_counts = count_per_class(labels, model.class_count);
  d.basis_counts = count_per_class(model.basis_labels, model.class_count);
  bool all_present = true;
  for (const Index c : d.class_counts) all_present = all_present && c > 0;
  if (all_present) {
    d.ideal_bounds = ideal_risk_bounds(d.class_counts, d.basis_counts);
    const double g = static_cast<double>(d.report.gamma);
    d.ideal_bounds_hold = g >= d.ideal_bounds.lower * (1 - 1e-8) && g <= d.ideal_bounds.upper * (1 + 1e-8);
  }
  try {
    auto pc = perturbation_check(W, labels, model.basis_labels);
    if (!pc.stats.condition_met) d.perturbation_note = "xi >= 1/n_rho, bounds do not apply";
    d.perturbation = pc;
  } catch (const Error& e) {
    d.perturbation_note = e.what();
  }
  return d;
}

template <typename Scalar>
struct LrcDiagnosis {
  RiskReport<Scalar> report;
  IdealCheck<Scalar> ideal;  // on the linear-augmented similarity
  Scalar beta = 0;
  std::optional<LrcIdealRisk<Scalar>> ideal_risk;
};

/// Risk of the LRC fit on (B, labels), with the ideal-graph check on the
/// mean-removed data.
template <typename Scalar, typename DB>
LrcDiagnosis<Scalar> lrc_risk_report(const LrcModel<Scalar>& model, const Eigen::MatrixBase<DB>& B,
                                     std::span<const int> labels, RiskOptions options = {}) {
  const Mat<Scalar> design = lrc_design(model, B);
  const Mat<Scalar> F = to_indicator<Scalar>(labels, model.class_count);
  LrcDiagnosis<Scalar> d;
  d.report = risk_report(F, design, model.lambda, options);
  const Mat<Scalar> centered = design.bottomRows(design.rows() - 1);
  const Mat<Scalar> recentered = centered.colwise() - centered.rowwise().mean();
  const auto aug = linear_augmented_similarity(recentered);
  d.beta = aug.beta;
  d.ideal = check_ideal_condition(aug.similarity.W, labels, labels, Scalar(1e-10));
  if (d.ideal.ideal) d.ideal_risk = lrc_ideal_risk(recentered, labels);
  return d;
}

}  // namespace sgc
