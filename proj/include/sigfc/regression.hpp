#pragma once

// Weighted linear models: OLS, Ridge, LASSO (cyclic coordinate descent) and
// the two-step LASSO (LASSO for support selection, then an OLS refit on the
// selected columns).
//
// All objectives share the weighted squared loss Σ_i w_i (y_i - f_i·θ)² with
// weights summing to one. An optional intercept column is never penalized and
// always belongs to the two-step refit support.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigfc/error.hpp"

namespace sigfc {

struct WeightedDesign {
  Eigen::MatrixXd features;  // rows = samples
  Eigen::VectorXd targets;
  Eigen::VectorXd weights;   // nonnegative, sum 1
  std::optional<std::size_t> intercept;

  std::size_t samples() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t columns() const { return static_cast<std::size_t>(features.cols()); }

  void validate() const {
    if (targets.size() != features.rows() || weights.size() != features.rows())
      throw InvalidArgument("WeightedDesign: rows, targets and weights differ in length");
    if (features.rows() == 0) throw InvalidArgument("WeightedDesign: no samples");
    if (!features.allFinite() || !targets.allFinite() || !weights.allFinite())
      throw InvalidArgument("WeightedDesign: non-finite input");
    if ((weights.array() < 0.0).any()) throw InvalidArgument("WeightedDesign: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
      throw InvalidArgument("WeightedDesign: weights must sum to 1");
    if (intercept && *intercept >= columns())
      throw InvalidArgument("WeightedDesign: intercept column out of range");
  }

  bool penalized(std::size_t j) const { return !intercept || *intercept != j; }
};

enum class ModelKind { ols, ridge, lasso, two_step_lasso };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ols: return "OLS";
    case ModelKind::ridge: return "Ridge";
    case ModelKind::lasso: return "LASSO";
    case ModelKind::two_step_lasso: return "TwoStepLASSO";
  }
  return "?";
}

struct LinearModelFit {
  Eigen::VectorXd coefficients;
  std::vector<std::size_t> support;  // { i : coefficients[i] != 0 }
  ModelKind kind = ModelKind::ols;
  double lambda = 0.0;
  double weighted_loss = 0.0;  // Σ w r², no penalty
  double objective = 0.0;      // weighted_loss + penalty
  std::size_t sweeps = 0;      // coordinate-descent sweeps (LASSO stages)
  // Two-step only: stage-1 LASSO support, and whether it picked nothing
  // beyond the intercept.
  std::vector<std::size_t> selected;
  bool empty_selection = false;
};

struct LassoOptions {
  double tolerance = 1e-8;        // max standardized coefficient change per sweep
  std::size_t max_sweeps = 10000;
};

namespace detail {

inline std::vector<std::size_t> nonzero_support(const Eigen::VectorXd& theta) {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (theta[i] != 0.0) s.push_back(static_cast<std::size_t>(i));
  return s;
}

inline double weighted_sse(const WeightedDesign& d, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd r = d.targets - d.features * theta;
  return (d.weights.array() * r.array().square()).sum();
}

inline double l1_penalty(const WeightedDesign& d, const Eigen::VectorXd& theta) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (d.penalized(static_cast<std::size_t>(j))) s += std::abs(theta[j]);
  return s;
}

// Weighted least squares on a subset of columns; coefficients outside `cols`
// are zero. Rank is judged by column-pivoted QR of the column-normalized
// sqrt(W)·F restricted to rows with positive weight.
inline Eigen::VectorXd least_squares_on(const WeightedDesign& d, const std::vector<std::size_t>& cols) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d.features.cols());
  if (cols.empty()) return theta;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < d.weights.size(); ++i)
    if (d.weights[i] > 0.0) rows.push_back(i);
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd a(nr, nc);
  Eigen::VectorXd b(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const double sw = std::sqrt(d.weights[rows[r]]);
    b[r] = sw * d.targets[rows[r]];
    for (Eigen::Index c = 0; c < nc; ++c)
      a(r, c) = sw * d.features(rows[r], static_cast<Eigen::Index>(cols[c]));
  }
  Eigen::VectorXd norms = a.colwise().norm();
  std::vector<std::size_t> dependent;
  for (Eigen::Index c = 0; c < nc; ++c) {
    if (norms[c] == 0.0)
      dependent.push_back(cols[c]);
    else
      a.col(c) /= norms[c];
  }
  if (dependent.empty()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < nc) {
      const auto& perm = qr.colsPermutation().indices();
      for (Eigen::Index k = qr.rank(); k < nc; ++k) dependent.push_back(cols[perm[k]]);
    } else {
      const Eigen::VectorXd x = qr.solve(b);
      for (Eigen::Index c = 0; c < nc; ++c)
        theta[static_cast<Eigen::Index>(cols[c])] = x[c] / norms[c];
      return theta;
    }
  }
  std::sort(dependent.begin(), dependent.end());
  std::ostringstream msg;
  msg << "weighted design is rank deficient; dependent columns:";
  for (auto c : dependent) msg << ' ' << c;
  throw RankDeficientError(msg.str(), dependent);
}

inline LinearModelFit finish(const WeightedDesign& d, Eigen::VectorXd theta, ModelKind kind,
                             double lambda, double penalty) {
  LinearModelFit fit;
  fit.coefficients = std::move(theta);
  fit.support = nonzero_support(fit.coefficients);
  fit.kind = kind;
  fit.lambda = lambda;
  fit.weighted_loss = weighted_sse(d, fit.coefficients);
  fit.objective = fit.weighted_loss + penalty;
  return fit;
}

inline std::vector<std::size_t> all_columns(const WeightedDesign& d) {
  std::vector<std::size_t> c(d.columns());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = j;
  return c;
}

inline void require_lambda(double lambda, const char* who) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument(std::string(who) + ": lambda must be finite and >= 0");
}

}  // namespace detail

/// Minimizer of Σ w (y - f·θ)². Throws RankDeficientError naming the
/// dependent columns when the weighted design lacks full column rank.
inline LinearModelFit fit_ols(const WeightedDesign& d) {
  d.validate();
  auto theta = detail::least_squares_on(d, detail::all_columns(d));
  return detail::finish(d, std::move(theta), ModelKind::ols, 0.0, 0.0);
}

/// Minimizer of Σ w (y - f·θ)² + λ‖θ‖₂² (intercept column, if any, unpenalized).
inline LinearModelFit fit_ridge(const WeightedDesign& d, double lambda) {
  d.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("fit_ridge: lambda must be finite and > 0");
  const Eigen::MatrixXd fw = d.features.transpose() * d.weights.asDiagonal();
  Eigen::MatrixXd gram = fw * d.features;
  for (std::size_t j = 0; j < d.columns(); ++j)
    if (d.penalized(j)) gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += lambda;
  const Eigen::VectorXd rhs = fw * d.targets;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("fit_ridge: factorization failed");
  Eigen::VectorXd theta = ldlt.solve(rhs);
  double penalty = 0.0;
  for (std::size_t j = 0; j < d.columns(); ++j)
    if (d.penalized(j)) penalty += theta[static_cast<Eigen::Index>(j)] * theta[static_cast<Eigen::Index>(j)];
  return detail::finish(d, std::move(theta), ModelKind::ridge, lambda, lambda * penalty);
}

/// Gradient of the weighted squared loss: g_j = -2 Σ_i w_i f_ij r_i.
inline Eigen::VectorXd loss_gradient(const WeightedDesign& d, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd r = d.targets - d.features * theta;
  return -2.0 * d.features.transpose() * (d.weights.array() * r.array()).matrix();
}

/// Σ w (y - f·θ)² + λ Σ_{penalized j} |θ_j|.
inline double lasso_objective(const WeightedDesign& d, const Eigen::VectorXd& theta, double lambda) {
  return detail::weighted_sse(d, theta) + lambda * detail::l1_penalty(d, theta);
}

/// Coefficients of the intercept-only model (zero vector without an intercept).
inline Eigen::VectorXd intercept_only(const WeightedDesign& d) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d.features.cols());
  if (d.intercept) {
    const auto c = static_cast<Eigen::Index>(*d.intercept);
    const double den = (d.weights.array() * d.features.col(c).array().square()).sum();
    if (den > 0.0)
      theta[c] = (d.weights.array() * d.features.col(c).array() * d.targets.array()).sum() / den;
  }
  return theta;
}

/// Smallest λ at which every penalized coefficient is zero:
/// max over penalized j of |2 Σ w f_j r₀| with r₀ the intercept-only residual.
inline double lambda_max(const WeightedDesign& d) {
  d.validate();
  const Eigen::VectorXd g = loss_gradient(d, intercept_only(d));
  double m = 0.0;
  for (std::size_t j = 0; j < d.columns(); ++j)
    if (d.penalized(j)) m = std::max(m, std::abs(g[static_cast<Eigen::Index>(j)]));
  return m;
}

/// Weighted LASSO by cyclic coordinate descent with soft-thresholding.
///
/// Columns are scaled internally to unit weighted second moment; the
/// intercept is updated first in every sweep, then the remaining columns in
/// index order. Converges when no standardized coefficient moves by more than
/// `opt.tolerance` in a sweep; otherwise throws NotConvergedError carrying a
/// duality-gap estimate.
inline LinearModelFit fit_lasso(const WeightedDesign& d, double lambda, const LassoOptions& opt = {}) {
  d.validate();
  detail::require_lambda(lambda, "fit_lasso");
  const Eigen::Index n = d.features.rows();
  const Eigen::Index p = d.features.cols();

  if (p == 0 || lambda >= lambda_max(d)) {
    auto fit = detail::finish(d, intercept_only(d), ModelKind::lasso, lambda, 0.0);
    fit.sweeps = 0;
    return fit;
  }

  Eigen::VectorXd scale(p);
  Eigen::MatrixXd g(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    scale[j] = std::sqrt((d.weights.array() * d.features.col(j).array().square()).sum());
    g.col(j) = scale[j] > 0.0 ? Eigen::VectorXd(d.features.col(j) / scale[j])
                              : Eigen::VectorXd::Zero(n);
  }

  std::vector<Eigen::Index> order;
  if (d.intercept) order.push_back(static_cast<Eigen::Index>(*d.intercept));
  for (Eigen::Index j = 0; j < p; ++j)
    if (!d.intercept || static_cast<Eigen::Index>(*d.intercept) != j) order.push_back(j);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = d.targets;
  std::size_t sweep = 0;
  bool converged = false;
  while (sweep < opt.max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (Eigen::Index j : order) {
      if (scale[j] == 0.0) continue;
      const double rho = (d.weights.array() * g.col(j).array() * resid.array()).sum() + beta[j];
      double updated;
      if (d.penalized(static_cast<std::size_t>(j))) {
        const double thr = lambda / (2.0 * scale[j]);
        updated = rho > thr ? rho - thr : (rho < -thr ? rho + thr : 0.0);
      } else {
        updated = rho;
      }
      const double change = updated - beta[j];
      if (change != 0.0) {
        resid -= change * g.col(j);
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    if (max_change < opt.tolerance) {
      converged = true;
      break;
    }
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j)
    if (scale[j] > 0.0) theta[j] = beta[j] / scale[j];

  if (!converged) {
    // Gap of the equivalent problem ½‖a - Aθ‖² + (λ/2)‖θ‖₁ with a = √W y, A = √W F,
    // evaluated at a dual point obtained by rescaling the residual.
    const Eigen::VectorXd sw = d.weights.array().sqrt();
    const Eigen::VectorXd a = sw.asDiagonal() * d.targets;
    const Eigen::VectorXd r = a - sw.asDiagonal() * (d.features * theta);
    const Eigen::VectorXd corr = (sw.asDiagonal() * d.features).transpose() * r;
    double cmax = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
      if (d.penalized(static_cast<std::size_t>(j))) cmax = std::max(cmax, std::abs(corr[j]));
    const double s = cmax > 0.0 ? std::min(1.0, 0.5 * lambda / cmax) : 1.0;
    const Eigen::VectorXd v = s * r;
    const double primal = 0.5 * r.squaredNorm() + 0.5 * lambda * detail::l1_penalty(d, theta);
    const double dual = 0.5 * a.squaredNorm() - 0.5 * (a - v).squaredNorm();
    const double gap = 2.0 * (primal - dual);
    throw NotConvergedError("fit_lasso: no convergence after " + std::to_string(sweep) +
                                " sweeps (duality gap estimate " + std::to_string(gap) + ")",
                            gap);
  }

  const double penalty = lambda * detail::l1_penalty(d, theta);
  auto fit = detail::finish(d, std::move(theta), ModelKind::lasso, lambda, penalty);
  fit.sweeps = sweep;
  return fit;
}

/// Two-step LASSO: the LASSO picks the support, then OLS is refit on that
/// support plus the intercept. Coefficients outside it are exactly zero.
/// At λ = 0 the selection step is skipped: every column with nonzero weighted
/// mass enters the refit, which reports rank deficiency directly instead of
/// letting coordinate descent wander along a flat valley.
inline LinearModelFit fit_two_step(const WeightedDesign& d, double lambda, const LassoOptions& opt = {}) {
  LinearModelFit stage1;
  if (lambda == 0.0) {
    d.validate();
    for (std::size_t j = 0; j < d.columns(); ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      if ((d.weights.array() * d.features.col(c).array().square()).sum() > 0.0) stage1.support.push_back(j);
    }
  } else {
    stage1 = fit_lasso(d, lambda, opt);
  }
  std::vector<std::size_t> cols;
  bool picked = false;
  for (auto j : stage1.support) {
    cols.push_back(j);
    if (d.penalized(j)) picked = true;
  }
  if (d.intercept && std::find(cols.begin(), cols.end(), *d.intercept) == cols.end()) {
    cols.push_back(*d.intercept);
    std::sort(cols.begin(), cols.end());
  }
  auto theta = detail::least_squares_on(d, cols);
  auto fit = detail::finish(d, std::move(theta), ModelKind::two_step_lasso, lambda, 0.0);
  fit.sweeps = stage1.sweeps;
  fit.selected = stage1.support;
  fit.empty_selection = !picked;
  return fit;
}

inline double predict(const LinearModelFit& fit, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(fit.coefficients.size()))
    throw InvalidArgument("predict: feature length " + std::to_string(features.size()) +
                          " does not match " + std::to_string(fit.coefficients.size()) +
                          " coefficients");
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i)
    s += fit.coefficients[static_cast<Eigen::Index>(i)] * features[i];
  return s;
}

}  // namespace sigfc
