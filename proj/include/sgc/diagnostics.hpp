#pragma once

// Fitting error and spectral risk of (regularized) linear regression
// min_D ||F - D A||_F^2 + lambda' ||D||_F^2, computed two independent ways:
// directly from the solution (risk_report) and from the SVD of A
// (spectral_breakdown). Also the ideal-case bounds, the regularization
// monotonicity laws and the per-class subspace gap.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgc/graph.hpp"
#include "sgc/indicator.hpp"
#include "sgc/numerics.hpp"

namespace sgc {

/// Both sides of the relative tradeoff identity when the denominator is taken
/// at the unregularized solution D0 and eps, gamma are those of D0.
template <typename Scalar>
struct UnregularizedReading {
  Scalar lhs = 0;  // g(D) / ||D0 A||^2
  Scalar rhs = 0;  // eps(D0) + lambda gamma(D0) - 1
};

template <typename Scalar>
struct RiskReport {
  Scalar f = 0;        // ||F - D A||_F^2
  Scalar epsilon = 1;  // f / ||D A||^2 + 1
  Scalar alpha = 0;    // ||D||_F^2
  Scalar gamma = 1;    // ||D||^2 ||A||^2 / ||D A||^2
  bool gamma_infinite = false;
  Scalar lambda = 0;
  Scalar lambda_prime = 0;
  Scalar fit_norm_sq = 0;  // ||D A||_F^2
  Scalar objective = 0;    // g(D), from the optimality condition ||F||^2 - <F, D A>
  Scalar tradeoff_value = 0;  // eps + lambda gamma - 1
  Scalar identity_residual_abs = 0;  // |g - (f + lambda' alpha)|
  Scalar identity_residual_rel = 0;  // |g / ||D A||^2 - (eps + lambda gamma - 1)| / max(1, eps + lambda gamma - 1)
  std::optional<UnregularizedReading<Scalar>> unregularized_reading;
};

struct RiskOptions {
  bool unregularized_reading = false;
};

namespace detail {

template <typename Scalar, typename DF, typename DA>
void require_not_orthogonal(const Eigen::MatrixBase<DF>& F, const Eigen::MatrixBase<DA>& A) {
  const Scalar cross = (F * A.transpose()).norm();
  if (!(cross > Scalar(1e-13) * F.norm() * A.norm())) {
    fail(ErrorKind::OrthogonalTarget, "target is orthogonal to the data (F A^T = 0)");
  }
}

template <typename Scalar>
struct Measures {
  Scalar f, alpha, fit, epsilon, gamma;
  bool gamma_infinite;
};

template <typename Scalar, typename DF, typename DA>
Measures<Scalar> measures(const Eigen::MatrixBase<DF>& F, const Eigen::MatrixBase<DA>& A, const Mat<Scalar>& D) {
  const Mat<Scalar> DA_ = D * A;
  Measures<Scalar> m{};
  m.f = (F - DA_).squaredNorm();
  m.alpha = D.squaredNorm();
  m.fit = DA_.squaredNorm();
  m.gamma_infinite = m.fit < Scalar(1e-300);
  m.epsilon = m.gamma_infinite ? std::numeric_limits<Scalar>::infinity() : m.f / m.fit + Scalar(1);
  m.gamma = m.gamma_infinite ? std::numeric_limits<Scalar>::infinity() : m.alpha * A.squaredNorm() / m.fit;
  return m;
}

}  // namespace detail

/// Gram-route error and risk measures at lambda' = lambda ||A||_F^2.
/// `solution` may carry an already computed D for the same (F, A, lambda).
template <typename DF, typename DA>
RiskReport<typename DA::Scalar> risk_report(const Eigen::MatrixBase<DF>& F, const Eigen::MatrixBase<DA>& A,
                                            typename DA::Scalar lambda, RiskOptions options = {},
                                            const Mat<typename DA::Scalar>* solution = nullptr) {
  using Scalar = typename DA::Scalar;
  if (F.cols() != A.cols()) fail(ErrorKind::DimensionMismatch, "risk_report: F and A column counts differ");
  detail::require_not_orthogonal<Scalar>(F, A);

  RiskReport<Scalar> rep;
  rep.lambda = lambda;
  rep.lambda_prime = lambda * A.squaredNorm();
  const Mat<Scalar> D = solution != nullptr ? *solution : ridge_solve(A, F, rep.lambda_prime);
  const auto m = detail::measures<Scalar>(F, A, D);
  rep.f = m.f;
  rep.alpha = m.alpha;
  rep.fit_norm_sq = m.fit;
  rep.epsilon = m.epsilon;
  rep.gamma = m.gamma;
  rep.gamma_infinite = m.gamma_infinite;

  // At the optimum ||D A||^2 + lambda' ||D||^2 = <F, D A>, so g = ||F||^2 - <F, D A>.
  const Mat<Scalar> fitted = D * A;
  rep.objective = F.squaredNorm() - F.cwiseProduct(fitted).sum();
  rep.identity_residual_abs = std::abs(rep.objective - (rep.f + rep.lambda_prime * rep.alpha));
  rep.tradeoff_value = rep.epsilon + lambda * rep.gamma - Scalar(1);
  if (!rep.gamma_infinite) {
    rep.identity_residual_rel = std::abs(rep.objective / rep.fit_norm_sq - rep.tradeoff_value) /
                                std::max(Scalar(1), std::abs(rep.tradeoff_value));
  } else {
    rep.identity_residual_rel = std::numeric_limits<Scalar>::infinity();
  }

  if (options.unregularized_reading) {
    try {
      const Mat<Scalar> D0 = ridge_solve(A, F, Scalar(0));
      const auto m0 = detail::measures<Scalar>(F, A, D0);
      UnregularizedReading<Scalar> u;
      u.lhs = rep.objective / m0.fit;
      u.rhs = m0.epsilon + lambda * m0.gamma - Scalar(1);
      rep.unregularized_reading = u;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularSystem) throw;
    }
  }
  return rep;
}

template <typename Scalar>
struct SpectralBreakdown {
  Vec<Scalar> singular_values;        // descending
  Vec<Scalar> projections;            // a_i^2 = sum_k (F_k V_i^T)^2
  Vec<Scalar> normalized_projections; // a~_i^2 (of the shrunk projections when lambda' > 0)
  Vec<Scalar> normalized_sv_sq;       // sigma~_i^2
  Vec<Scalar> shrunk_projections;     // a'_i^2 = a_i^2 s_i^4 / (s_i^2 + lambda')^2
  Scalar target_norm_sq = 0;          // ||F||_F^2 (= n for indicators)
  Scalar lambda_prime = 0;
  Scalar alpha = 0;
  Scalar gamma = 1;
  Scalar f = 0;
  Scalar epsilon = 1;
};

/// SVD-route closed forms for alpha, gamma, f and epsilon.
template <typename DF, typename DA>
SpectralBreakdown<typename DA::Scalar> spectral_breakdown(const Eigen::MatrixBase<DF>& F,
                                                          const Eigen::MatrixBase<DA>& A,
                                                          typename DA::Scalar lambda_prime) {
  using Scalar = typename DA::Scalar;
  if (F.cols() != A.cols()) fail(ErrorKind::DimensionMismatch, "spectral_breakdown: F and A column counts differ");
  if (!(lambda_prime >= Scalar(0))) fail(ErrorKind::InvalidArgument, "spectral_breakdown: lambda' must be >= 0");
  detail::require_not_orthogonal<Scalar>(F, A);

  const ThinSvd<Scalar> svd = thin_svd(A);
  const Index m = svd.singular_values.size();
  SpectralBreakdown<Scalar> out;
  out.lambda_prime = lambda_prime;
  out.singular_values = svd.singular_values;
  out.projections = (F * svd.V.transpose()).colwise().squaredNorm().transpose();
  out.target_norm_sq = F.squaredNorm();

  // Directions with a zero singular value carry no solution component
  // (pseudo-inverse convention when lambda' = 0).
  const Scalar cut = Scalar(1e-12) * (m > 0 ? svd.singular_values(0) : Scalar(0));
  const Scalar sv_total = svd.singular_values.squaredNorm();
  out.normalized_sv_sq = svd.singular_values.array().square() / sv_total;
  out.shrunk_projections.setZero(m);

  Scalar alpha = 0, removed = 0, eps_num = out.target_norm_sq;
  for (Index i = 0; i < m; ++i) {
    const Scalar s = svd.singular_values(i);
    if (!(s > cut)) continue;
    const Scalar s2 = s * s;
    const Scalar a2 = out.projections(i);
    const Scalar den = (s2 + lambda_prime) * (s2 + lambda_prime);
    alpha += a2 * s2 / den;
    removed += a2 * (Scalar(1) - lambda_prime * lambda_prime / den);
    eps_num -= Scalar(2) * a2 * s2 * lambda_prime / den;
    out.shrunk_projections(i) = a2 * s2 * s2 / den;
  }
  const Scalar shrunk_total = out.shrunk_projections.sum();
  out.normalized_projections = out.shrunk_projections / shrunk_total;
  out.alpha = alpha;
  out.f = out.target_norm_sq - removed;
  out.epsilon = eps_num / shrunk_total;
  Scalar gamma = 0;
  for (Index i = 0; i < m; ++i) {
    if (out.shrunk_projections(i) > Scalar(0)) gamma += out.normalized_projections(i) / out.normalized_sv_sq(i);
  }
  out.gamma = gamma;
  return out;
}

template <typename Scalar>
struct RiskBounds {
  Scalar lower = 0;
  Scalar upper = 0;
};

/// Spectral-risk range of an ideal nRBFN: (r/n) sum_k n_k / r_k <= gamma <= r.
inline RiskBounds<double> ideal_risk_bounds(std::span<const Index> class_counts, std::span<const Index> basis_counts) {
  if (class_counts.size() != basis_counts.size() || class_counts.empty()) {
    fail(ErrorKind::DimensionMismatch, "ideal_risk_bounds: need one basis count per class");
  }
  double n = 0, r = 0, ratio = 0;
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    if (class_counts[k] < 1 || basis_counts[k] < 1) {
      fail(ErrorKind::InvalidArgument, "ideal_risk_bounds: counts must be >= 1");
    }
    n += static_cast<double>(class_counts[k]);
    r += static_cast<double>(basis_counts[k]);
    ratio += static_cast<double>(class_counts[k]) / static_cast<double>(basis_counts[k]);
  }
  return {r / n * ratio, r};
}

template <typename Scalar>
struct LrcIdealRisk {
  Scalar gamma = 0;  // 1 + zeta_bar / beta
  Scalar lower = 0;
  Scalar upper = 0;
  Scalar zeta_bar = 0;   // mean squared sample length
  Scalar beta = 0;
  Scalar zeta_rho = 0;   // max / min squared length
  Scalar cos_theta_u = 0;  // cosine of the pair achieving min A_i^T A_j
};

/// Closed-form spectral risk of ideal LRC and its length/angle bounds.
template <typename DA>
LrcIdealRisk<typename DA::Scalar> lrc_ideal_risk(const Eigen::MatrixBase<DA>& A, std::span<const int> labels) {
  using Scalar = typename DA::Scalar;
  const auto aug = linear_augmented_similarity(A);
  const auto check = check_ideal_condition(aug.similarity.W, labels, labels, Scalar(1e-10));
  if (!check.ideal) {
    fail(ErrorKind::IdealConditionViolated,
         "lrc_ideal_risk: between-class similarity " + std::to_string(static_cast<double>(check.max_violation)));
  }
  const Index n = A.cols();
  const Vec<Scalar> len2 = A.colwise().squaredNorm().transpose();
  const Mat<Scalar> gram = A.transpose() * A;
  Index i = 0, j = 0;
  gram.minCoeff(&i, &j);

  LrcIdealRisk<Scalar> out;
  out.beta = aug.beta;
  out.zeta_bar = A.squaredNorm() / static_cast<Scalar>(n);
  out.gamma = Scalar(1) + out.zeta_bar / out.beta;
  out.zeta_rho = len2.maxCoeff() / len2.minCoeff();
  out.cos_theta_u = gram(i, j) / std::sqrt(len2(i) * len2(j));
  const Scalar c = std::abs(out.cos_theta_u);
  out.lower = Scalar(1) + Scalar(1) / (out.zeta_rho * c);
  out.upper = Scalar(1) + out.zeta_rho / c;
  return out;
}

template <typename Scalar>
struct MonotonicityRow {
  Scalar lambda_prime = 0;
  Scalar f = 0, epsilon = 0, alpha = 0, gamma = 0;
  bool f_increased = false;
  bool epsilon_increased = false;
  bool alpha_decreased = false;
  bool gamma_ok = false;  // strict decrease, or equality for a uniform spectrum
};

template <typename Scalar>
struct MonotonicityReport {
  RiskReport<Scalar> baseline;  // lambda' = 0
  bool uniform_spectrum = false;
  std::vector<MonotonicityRow<Scalar>> rows;
  bool all_pass = true;
};

/// Compares each regularized fit against the unregularized one: f and eps
/// must rise, alpha must fall, gamma must fall unless the singular values
/// carrying a nonzero projection are all equal (then gamma stays put).
template <typename DF, typename DA>
MonotonicityReport<typename DA::Scalar> regularization_monotonicity_check(
    const Eigen::MatrixBase<DF>& F, const Eigen::MatrixBase<DA>& A,
    std::span<const typename DA::Scalar> lambda_prime_grid) {
  using Scalar = typename DA::Scalar;
  MonotonicityReport<Scalar> rep;
  rep.baseline = risk_report(F, A, Scalar(0));

  const auto sb = spectral_breakdown(F, A, Scalar(0));
  const Scalar proj_total = sb.projections.sum();
  Scalar smax = 0, smin = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < sb.projections.size(); ++i) {
    if (sb.projections(i) > Scalar(1e-12) * proj_total) {
      smax = std::max(smax, sb.singular_values(i));
      smin = std::min(smin, sb.singular_values(i));
    }
  }
  rep.uniform_spectrum = smax <= smin * (Scalar(1) + Scalar(1e-10));

  const Scalar a_norm2 = A.squaredNorm();
  for (const Scalar lp : lambda_prime_grid) {
    if (!(lp > Scalar(0))) fail(ErrorKind::InvalidArgument, "monotonicity grid values must be > 0");
    const auto r = risk_report(F, A, lp / a_norm2);
    MonotonicityRow<Scalar> row;
    row.lambda_prime = lp;
    row.f = r.f;
    row.epsilon = r.epsilon;
    row.alpha = r.alpha;
    row.gamma = r.gamma;
    row.f_increased = r.f > rep.baseline.f;
    row.epsilon_increased = r.epsilon > rep.baseline.epsilon;
    row.alpha_decreased = r.alpha < rep.baseline.alpha;
    row.gamma_ok = rep.uniform_spectrum
                       ? std::abs(r.gamma - rep.baseline.gamma) <= Scalar(1e-10) * rep.baseline.gamma
                       : r.gamma < rep.baseline.gamma;
    rep.all_pass = rep.all_pass && row.f_increased && row.epsilon_increased && row.alpha_decreased && row.gamma_ok;
    rep.rows.push_back(row);
  }
  return rep;
}

template <typename Scalar>
struct ClassGap {
  int label = 0;
  Index basis_count = 0;   // r_k
  Index sample_count = 0;  // n_k
  Scalar psi = 0;          // sigma_1^2 - n_k / r_k
  Scalar sigma1_sq = 0;
  Scalar ratio = 0;        // n_k / r_k
  Scalar z_max = 0;        // maximal row sum of the block
  bool bound_holds = false;  // 0 <= psi <= z_max - n_k / r_k
};

template <typename Scalar>
struct GapReport {
  std::vector<ClassGap<Scalar>> classes;
};

/// Per-class gap between the indicator row and the leading singular
/// direction of an ideal (block-structured) W~.
template <typename DW>
GapReport<typename DW::Scalar> subspace_gap(const Eigen::MatrixBase<DW>& W_tilde, std::span<const int> labels,
                                            std::span<const int> basis_labels) {
  using Scalar = typename DW::Scalar;
  const auto check = check_ideal_condition(W_tilde, labels, basis_labels, Scalar(1e-12));
  if (!check.ideal) {
    fail(ErrorKind::IdealConditionViolated,
         "subspace_gap: between-class entry " + std::to_string(static_cast<double>(check.max_violation)));
  }
  const int K = std::max(class_count(labels), class_count(basis_labels));
  GapReport<Scalar> rep;
  for (int k = 1; k <= K; ++k) {
    std::vector<Index> rows, cols;
    for (std::size_t i = 0; i < basis_labels.size(); ++i)
      if (basis_labels[i] == k) rows.push_back(static_cast<Index>(i));
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[j] == k) cols.push_back(static_cast<Index>(j));
    if (rows.empty() || cols.empty()) continue;
    const Mat<Scalar> block = W_tilde(rows, cols);

    ClassGap<Scalar> g;
    g.label = k;
    g.basis_count = static_cast<Index>(rows.size());
    g.sample_count = static_cast<Index>(cols.size());
    const Scalar s1 = spectral_norm(block);
    g.sigma1_sq = s1 * s1;
    g.ratio = static_cast<Scalar>(g.sample_count) / static_cast<Scalar>(g.basis_count);
    g.psi = g.sigma1_sq - g.ratio;
    g.z_max = block.rowwise().sum().maxCoeff();
    const Scalar slack = Scalar(1e-10) * std::max(Scalar(1), g.z_max);
    g.bound_holds = g.psi >= -slack && g.psi <= g.z_max - g.ratio + slack;
    rep.classes.push_back(g);
  }
  return rep;
}

}  // namespace sgc
