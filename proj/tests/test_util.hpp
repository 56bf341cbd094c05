#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "sigfc/signature.hpp"

namespace sigfc::test {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline DataStream random_stream(std::mt19937_64& rng, std::size_t dim, std::size_t length, double scale = 1.0) {
  return {dim, random_vector(rng, dim * length, scale)};
}

/// Random group element: level 0 = 1, other levels Gaussian.
inline GradedTensor random_group_element(std::mt19937_64& rng, std::size_t dim, std::size_t depth) {
  auto flat = random_vector(rng, sig_dim(dim, depth), 0.5);
  flat[0] = 1.0;
  return {dim, depth, flat};
}

/// Dense solve by Gaussian elimination with partial pivoting; the oracle for
/// the regression tests, independent of the Eigen-backed implementation.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("gauss_solve: singular");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Iterated integrals of the piecewise-linear interpolation of `s` by nested
/// trapezoidal Riemann-Stieltjes sums: level k at step m+1 adds
/// ½(S^{k-1}(t_m) + S^{k-1}(t_{m+1})) ⊗ ΔX_m, with `subdivisions` steps spread
/// evenly over the segments. Shares nothing with the exp/⊠ route.
inline std::vector<std::vector<double>> quadrature_signature(const DataStream& s, std::size_t depth,
                                                             std::size_t subdivisions) {
  const std::size_t d = s.dim();
  const std::size_t segments = s.length() - 1;
  std::vector<std::vector<double>> levels(depth + 1);
  std::size_t size = 1;
  for (std::size_t k = 0; k <= depth; ++k) {
    levels[k].assign(size, 0.0);
    size *= d;
  }
  levels[0][0] = 1.0;
  if (segments == 0) return levels;
  const std::size_t per = subdivisions / segments;
  std::vector<double> step(d);
  for (std::size_t seg = 0; seg < segments; ++seg) {
    for (std::size_t j = 0; j < d; ++j)
      step[j] = (s.point(seg + 1)[j] - s.point(seg)[j]) / static_cast<double>(per);
    for (std::size_t m = 0; m < per; ++m) {
      std::vector<std::vector<double>> old = levels;
      for (std::size_t k = 1; k <= depth; ++k) {
        // levels[k-1] already holds S^{k-1}(t_{m+1}); old[k-1] holds S^{k-1}(t_m).
        const auto& lower_old = old[k - 1];
        const auto& lower_new = levels[k - 1];
        auto& dst = levels[k];
        for (std::size_t p = 0; p < lower_old.size(); ++p) {
          const double avg = 0.5 * (lower_old[p] + lower_new[p]);
          for (std::size_t q = 0; q < d; ++q) dst[p * d + q] += avg * step[q];
        }
      }
    }
  }
  return levels;
}

}  // namespace sigfc::test

#include <Eigen/Dense>
#include <limits>

#include "sigfc/regression.hpp"

namespace sigfc::test {

/// Random weighted design: column 0 constant 1 (the intercept), `features`
/// Gaussian columns, targets linear in the first few columns plus noise,
/// weights from a Dirichlet-like draw.
inline WeightedDesign random_design(std::mt19937_64& rng, std::size_t rows, std::size_t features,
                                    double noise = 0.5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  WeightedDesign d;
  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(features + 1);
  d.features.resize(r, c);
  d.targets.resize(r);
  d.weights.resize(r);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(c);
  truth[0] = 1.0;
  for (Eigen::Index j = 1; j < c; ++j) truth[j] = (j % 3 == 1) ? normal(rng) * 2.0 : 0.2 * normal(rng);
  for (Eigen::Index i = 0; i < r; ++i) {
    d.features(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < c; ++j) d.features(i, j) = normal(rng);
    d.targets[i] = d.features.row(i).dot(truth) + noise * normal(rng);
    d.weights[i] = unif(rng);
  }
  d.weights /= d.weights.sum();
  d.intercept = 0;
  return d;
}

/// Normal-equation solve of weighted least squares on columns `cols`.
inline std::vector<double> normal_equations(const WeightedDesign& d, const std::vector<std::size_t>& cols,
                                            const std::vector<double>& rhs_shift = {}) {
  const std::size_t k = cols.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
  std::vector<double> b(k, 0.0);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    const double w = d.weights[i];
    for (std::size_t p = 0; p < k; ++p) {
      const double fp = d.features(i, static_cast<Eigen::Index>(cols[p]));
      b[p] += w * fp * d.targets[i];
      for (std::size_t q = 0; q < k; ++q) a[p][q] += w * fp * d.features(i, static_cast<Eigen::Index>(cols[q]));
    }
  }
  for (std::size_t p = 0; p < rhs_shift.size(); ++p) b[p] -= rhs_shift[p];
  return gauss_solve(a, b);
}

inline double objective_of(const WeightedDesign& d, const std::vector<std::size_t>& cols,
                           const std::vector<double>& theta, double lambda) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    double pred = 0.0;
    for (std::size_t p = 0; p < cols.size(); ++p) pred += d.features(i, static_cast<Eigen::Index>(cols[p])) * theta[p];
    loss += d.weights[i] * (d.targets[i] - pred) * (d.targets[i] - pred);
  }
  double pen = 0.0;
  for (std::size_t p = 0; p < cols.size(); ++p)
    if (d.penalized(cols[p])) pen += std::abs(theta[p]);
  return loss + lambda * pen;
}

/// Exhaustive LASSO oracle: for every support S of penalized columns and every
/// sign pattern s on S, solve the stationarity system
///   F_Aᵀ W F_A θ = F_Aᵀ W y - (λ/2) s   (A = S plus the intercept)
/// and keep solutions whose signs agree with s. Each kept θ is a feasible
/// point and the minimizer is among them, so the smallest objective is the
/// optimum. Ties go to the smaller support, then the lexicographically
/// smaller index set.
struct ExhaustiveResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> support;
};

inline ExhaustiveResult lasso_exhaustive(const WeightedDesign& d, double lambda) {
  std::vector<std::size_t> pen;
  for (std::size_t j = 0; j < d.columns(); ++j)
    if (d.penalized(j)) pen.push_back(j);
  ExhaustiveResult best;
  const std::size_t m = pen.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<std::size_t> cols;
    if (d.intercept) cols.push_back(*d.intercept);
    std::vector<std::size_t> sel;
    for (std::size_t b = 0; b < m; ++b)
      if (mask & (std::size_t{1} << b)) sel.push_back(pen[b]);
    cols.insert(cols.end(), sel.begin(), sel.end());
    std::sort(cols.begin(), cols.end());
    const std::size_t ns = sel.size();
    for (std::size_t signs = 0; signs < (std::size_t{1} << ns); ++signs) {
      std::vector<double> shift(cols.size(), 0.0);
      std::vector<double> sgn(cols.size(), 0.0);
      std::size_t bit = 0;
      for (std::size_t p = 0; p < cols.size(); ++p) {
        if (!d.penalized(cols[p])) continue;
        sgn[p] = (signs & (std::size_t{1} << bit)) ? -1.0 : 1.0;
        shift[p] = 0.5 * lambda * sgn[p];
        ++bit;
      }
      std::vector<double> theta;
      if (cols.empty()) {
        theta = {};
      } else {
        try {
          theta = normal_equations(d, cols, shift);
        } catch (const std::runtime_error&) {
          continue;
        }
      }
      bool consistent = true;
      for (std::size_t p = 0; p < cols.size(); ++p)
        if (sgn[p] != 0.0 && !(theta[p] * sgn[p] > 0.0)) consistent = false;
      if (!consistent) continue;
      const double obj = objective_of(d, cols, theta, lambda);
      const bool better = obj < best.objective - 1e-14 ||
                          (std::abs(obj - best.objective) <= 1e-14 &&
                           (sel.size() < best.support.size() ||
                            (sel.size() == best.support.size() && sel < best.support)));
      if (better) {
        best.objective = obj;
        best.support = sel;
      }
    }
  }
  return best;
}

}  // namespace sigfc::test
