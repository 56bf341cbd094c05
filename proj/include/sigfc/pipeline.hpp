#pragma once

// Multi-horizon forecasting with adaptive signature-kernel weights.
//
// For an origin t and horizon Δt, every past sample τ (with τ + Δt <= t) pairs
// the feature vector [x_τ, Sig^N(y_{τ-l..τ})] with the target y_{τ+Δt}. Samples
// are weighted by the similarity of their window to the most recent one, a
// two-step LASSO is fit on the weighted design, and the fitted model is
// applied to the features at t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sigfc/dates.hpp"
#include "sigfc/error.hpp"
#include "sigfc/regression.hpp"
#include "sigfc/sig_kernel.hpp"
#include "sigfc/signature.hpp"

namespace sigfc {

// ---------------------------------------------------------------------------
// Data

/// Target series y with aligned factor series x (one vector per factor).
struct FactorPanel {
  std::vector<std::string> dates;
  std::vector<double> target;
  std::vector<std::string> factor_names;
  std::vector<std::vector<double>> factors;

  std::size_t length() const noexcept { return target.size(); }
  std::size_t factor_count() const noexcept { return factors.size(); }

  void validate() const {
    if (dates.size() != target.size())
      throw DataError("FactorPanel: date and target lengths differ");
    if (factor_names.size() != factors.size())
      throw DataError("FactorPanel: factor names and series differ in count");
    for (std::size_t j = 0; j < factors.size(); ++j)
      if (factors[j].size() != target.size())
        throw DataError("FactorPanel: factor '" + factor_names[j] + "' has the wrong length");
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(target)) throw DataError("FactorPanel: target has missing or non-finite values");
    for (std::size_t j = 0; j < factors.size(); ++j)
      if (!finite(factors[j]))
        throw DataError("FactorPanel: factor '" + factor_names[j] + "' has missing or non-finite values");
  }

  /// First n observations.
  FactorPanel truncated(std::size_t n) const {
    if (n > length()) throw InvalidArgument("FactorPanel::truncated: beyond panel length");
    FactorPanel p;
    p.dates.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(n));
    p.target.assign(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(n));
    p.factor_names = factor_names;
    for (const auto& f : factors) p.factors.emplace_back(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(n));
    return p;
  }

  /// Panel keeping only the listed factor indices, in the given order.
  FactorPanel with_factors(const std::vector<std::size_t>& keep) const {
    FactorPanel p;
    p.dates = dates;
    p.target = target;
    for (auto j : keep) {
      p.factor_names.push_back(factor_names.at(j));
      p.factors.push_back(factors.at(j));
    }
    return p;
  }
};

// ---------------------------------------------------------------------------
// Factor screening

/// Pearson correlation; nullopt when either series has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

enum class ScreenAction { kept, low_correlation, zero_variance, collinear };

inline const char* to_string(ScreenAction a) {
  switch (a) {
    case ScreenAction::kept: return "kept";
    case ScreenAction::low_correlation: return "dropped_low_correlation";
    case ScreenAction::zero_variance: return "dropped_zero_variance";
    case ScreenAction::collinear: return "dropped_collinear";
  }
  return "?";
}

struct ScreeningDecision {
  std::string factor;
  double correlation = 0.0;  // with the target; 0 when undefined
  ScreenAction action = ScreenAction::kept;
  std::string partner;       // collinear: the kept factor that displaced this one
  double partner_correlation = 0.0;
};

struct ScreeningResult {
  FactorPanel panel;
  std::vector<ScreeningDecision> report;  // one entry per input factor, input order
};

/// Drop factors whose |corr(x, y)| < rho_min (or which are constant), then
/// walk the survivors by decreasing |corr(x, y)| and drop any factor whose
/// |corr| with an already kept factor exceeds rho_max.
inline ScreeningResult screen_factors(const FactorPanel& panel, double rho_min, double rho_max) {
  panel.validate();
  if (panel.length() < 3) throw DataError("screen_factors: need at least 3 observations");
  detail::require(rho_min >= 0.0 && rho_min <= 1.0, "screen_factors: rho_min must lie in [0, 1]");
  detail::require(rho_max > 0.0 && rho_max <= 1.0, "screen_factors: rho_max must lie in (0, 1]");

  const std::size_t k = panel.factor_count();
  std::vector<ScreeningDecision> report(k);
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < k; ++j) {
    report[j].factor = panel.factor_names[j];
    const auto& x = panel.factors[j];
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    if (constant) {
      report[j].action = ScreenAction::zero_variance;
      continue;
    }
    const auto r = pearson(x, panel.target);
    report[j].correlation = r.value_or(0.0);
    if (std::abs(report[j].correlation) < rho_min) {
      report[j].action = ScreenAction::low_correlation;
      continue;
    }
    candidates.push_back(j);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(report[a].correlation) > std::abs(report[b].correlation);
  });
  std::vector<std::size_t> kept;
  for (auto j : candidates) {
    bool keep = true;
    for (auto i : kept) {
      const double r = pearson(panel.factors[j], panel.factors[i]).value_or(0.0);
      if (std::abs(r) > rho_max) {
        report[j].action = ScreenAction::collinear;
        report[j].partner = panel.factor_names[i];
        report[j].partner_correlation = r;
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(j);
  }
  std::sort(kept.begin(), kept.end());
  return {panel.with_factors(kept), std::move(report)};
}

// ---------------------------------------------------------------------------
// Configuration

/// Which series the kernel windows are cut from: the joint samples
/// z_τ = (x_τ, y_{τ+Δt}) compared against the last labelled sample, or the
/// target alone compared against the current window y_{t-l..t}.
enum class KernelWindows { joint, target };

struct ForecastConfig {
  std::size_t horizons = 12;       // forecast Δt = 1..horizons
  std::size_t window = 8;          // l
  std::size_t depth = 3;           // N
  double temperature = 0.1;        // γ
  std::vector<double> lambda_grid{0.0};
  double rho_min = 0.2;
  double rho_max = 0.95;
  bool augment_kernel = true;
  bool augment_features = false;
  KernelWindows kernel_windows = KernelWindows::joint;
  double validation_fraction = 0.2;
  std::size_t threads = 1;

  void validate() const {
    detail::require(horizons >= 1, "ForecastConfig: horizons must be >= 1");
    detail::require(window >= 1, "ForecastConfig: window must be >= 1");
    detail::require(depth >= 1, "ForecastConfig: depth must be >= 1");
    detail::require(temperature >= 0.0 && std::isfinite(temperature),
                    "ForecastConfig: temperature must be finite and >= 0");
    detail::require(!lambda_grid.empty(), "ForecastConfig: lambda grid is empty");
    for (double l : lambda_grid)
      detail::require(l >= 0.0 && std::isfinite(l), "ForecastConfig: lambda values must be >= 0");
    detail::require(rho_min >= 0.0 && rho_min <= 1.0, "ForecastConfig: rho_min must lie in [0, 1]");
    detail::require(rho_max > 0.0 && rho_max <= 1.0, "ForecastConfig: rho_max must lie in (0, 1]");
    detail::require(validation_fraction > 0.0 && validation_fraction <= 1.0,
                    "ForecastConfig: validation_fraction must lie in (0, 1]");
    detail::require(threads >= 1, "ForecastConfig: threads must be >= 1");
  }

  KernelConfig kernel() const { return {depth, window, temperature, augment_kernel}; }
};

// ---------------------------------------------------------------------------
// Parallel helper

/// Runs f(0..n-1) on up to `threads` threads. Each index writes its own
/// output slot, so results do not depend on the schedule. The exception of
/// the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Features and per-horizon fits

/// Number of entries of build_features for a panel with `factors` factors.
inline std::size_t feature_dim(std::size_t factors, const ForecastConfig& cfg) {
  return factors + sig_dim(cfg.augment_features ? 2 : 1, cfg.depth);
}

/// [x_τ, flatten(Sig^N(y_{τ-l..τ}))]. The level-0 signature entry (always 1)
/// sits at index factor_count() and serves as the intercept.
inline std::vector<double> build_features(const FactorPanel& panel, std::size_t tau,
                                          const ForecastConfig& cfg) {
  if (tau < cfg.window || tau >= panel.length())
    throw InvalidArgument("build_features: index " + std::to_string(tau) +
                          " has no complete window in a panel of length " +
                          std::to_string(panel.length()));
  std::vector<double> out;
  out.reserve(feature_dim(panel.factor_count(), cfg));
  for (const auto& f : panel.factors) out.push_back(f[tau]);
  const auto first = panel.target.begin() + static_cast<std::ptrdiff_t>(tau - cfg.window);
  const DataStream window = DataStream::from_series(
      std::span<const double>(&*first, cfg.window + 1));
  const GradedTensor sig = cfg.augment_features ? signature(augment_time(window), cfg.depth)
                                                : signature(window, cfg.depth);
  auto flat = sig.flat();
  out.insert(out.end(), flat.begin(), flat.end());
  return out;
}

/// Observations needed to fit horizon Δt at the last index of a panel.
inline std::size_t min_history(std::size_t horizon, const ForecastConfig& cfg) {
  return cfg.window + horizon + 5;
}

/// Weighted design for origin t and horizon Δt, built from data indexed <= t.
struct HorizonProblem {
  WeightedDesign design;           // rows are samples τ = window .. t-Δt
  std::vector<double> origin_features;
  WeightVector weights;            // over samples τ = 0 .. t-Δt
  std::size_t first_sample = 0;    // τ of design row 0
};

/// Kernel weights for horizon Δt at origin t (see KernelWindows).
inline WeightVector horizon_weights(const FactorPanel& panel, std::size_t horizon,
                                    const ForecastConfig& cfg, std::size_t origin) {
  const std::size_t m = origin - horizon + 1;
  const KernelConfig kcfg = cfg.kernel();
  if (cfg.kernel_windows == KernelWindows::joint) {
    const std::size_t d = panel.factor_count() + 1;
    std::vector<double> pts;
    pts.reserve(m * d);
    for (std::size_t tau = 0; tau < m; ++tau) {
      for (const auto& f : panel.factors) pts.push_back(f[tau]);
      pts.push_back(panel.target[tau + horizon]);
    }
    return ada_weights(DataStream(d, std::move(pts)), kcfg, horizon);
  }
  const DataStream y(1, std::vector<double>(panel.target.begin(),
                                            panel.target.begin() + static_cast<std::ptrdiff_t>(origin + 1)));
  const auto delta = window_distances(y, kcfg, m, origin);
  return weights_from_distances(delta, cfg.window, cfg.temperature, horizon);
}

inline HorizonProblem prepare_horizon(const FactorPanel& panel, std::size_t horizon,
                                      const ForecastConfig& cfg, std::size_t origin) {
  detail::require(horizon >= 1, "prepare_horizon: horizon must be >= 1");
  if (origin >= panel.length()) throw InvalidArgument("prepare_horizon: origin beyond panel");
  if (origin + 1 < min_history(horizon, cfg))
    throw DataError("insufficient history: horizon " + std::to_string(horizon) + " needs " +
                    std::to_string(min_history(horizon, cfg)) + " observations up to the origin, have " +
                    std::to_string(origin + 1));
  HorizonProblem prob;
  prob.weights = horizon_weights(panel, horizon, cfg, origin);
  prob.first_sample = cfg.window;
  const std::size_t m = origin - horizon + 1;
  const std::size_t rows = m - cfg.window;
  const std::size_t cols = feature_dim(panel.factor_count(), cfg);
  prob.design.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  prob.design.targets.resize(static_cast<Eigen::Index>(rows));
  prob.design.weights.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t tau = cfg.window + r;
    const auto f = build_features(panel, tau, cfg);
    for (std::size_t c = 0; c < cols; ++c)
      prob.design.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
    prob.design.targets[static_cast<Eigen::Index>(r)] = panel.target[tau + horizon];
    prob.design.weights[static_cast<Eigen::Index>(r)] = prob.weights.weights[tau];
  }
  prob.design.intercept = panel.factor_count();
  prob.origin_features = build_features(panel, origin, cfg);
  return prob;
}

struct HorizonFit {
  LinearModelFit fit;
  WeightVector weights;
  double forecast = 0.0;  // prediction of y_{origin+Δt}
};

/// Adaptive weights plus two-step LASSO for one horizon at `origin`
/// (default: the last index of the panel).
inline HorizonFit fit_horizon(const FactorPanel& panel, std::size_t horizon, const ForecastConfig& cfg,
                              double lambda, std::optional<std::size_t> origin = std::nullopt) {
  cfg.validate();
  panel.validate();
  if (panel.length() == 0) throw DataError("fit_horizon: empty panel");
  const std::size_t t = origin.value_or(panel.length() - 1);
  auto prob = prepare_horizon(panel, horizon, cfg, t);
  HorizonFit out;
  out.fit = fit_two_step(prob.design, lambda);
  out.forecast = predict(out.fit, prob.origin_features);
  out.weights = std::move(prob.weights);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

/// |actual - forecast| / |actual|; undefined when actual is 0.
inline std::optional<double> relative_error(double actual, double forecast) {
  if (actual == 0.0) return std::nullopt;
  return std::abs(actual - forecast) / std::abs(actual);
}

/// Fraction as a percentage rounded half-up to `decimals` places, e.g. "2.05%".
inline std::string format_percent(double fraction, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double rounded = std::floor(fraction * 100.0 * scale + 0.5) / scale;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f%%", decimals, rounded);
  return buf;
}

/// Mean of values grouped by calendar month (key "YYYY-MM"), months ascending.
/// Values inside a month are summed in sorted order, so the result does not
/// depend on input order.
inline std::vector<std::pair<std::string, double>> aggregate_monthly(
    const std::vector<std::string>& dates, const std::vector<double>& values) {
  if (dates.size() != values.size()) throw InvalidArgument("aggregate_monthly: length mismatch");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < dates.size(); ++i) groups[dates::month_key(dates[i])].push_back(values[i]);
  std::vector<std::pair<std::string, double>> out;
  for (auto& [month, v] : groups) {
    std::sort(v.begin(), v.end());
    out.emplace_back(month, std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lambda selection, forecasting, backtesting

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> mean_error;  // per grid entry; +inf when no fit succeeded
  std::size_t validation_origins = 0;
};

/// Rolling-origin choice of λ for one horizon: the last validation_fraction of
/// the origins that can be fit and scored using data <= t are replayed, each
/// grid value is scored by mean relative error, and the smallest λ within one
/// standard error of the best is returned. A single-entry grid, or a history
/// too short to validate, returns the first grid entry.
inline LambdaSelection select_lambda(const FactorPanel& panel, std::size_t horizon,
                                     const ForecastConfig& cfg, std::size_t origin) {
  LambdaSelection sel;
  sel.lambda = cfg.lambda_grid.front();
  const std::size_t g = cfg.lambda_grid.size();
  sel.mean_error.assign(g, std::numeric_limits<double>::infinity());
  if (g == 1) return sel;
  const std::size_t first = min_history(horizon, cfg) - 1;
  if (origin < horizon || origin - horizon < first) return sel;
  const std::size_t last = origin - horizon;
  const std::size_t available = last - first + 1;
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.validation_fraction * static_cast<double>(available))));
  sel.validation_origins = count;

  std::vector<std::vector<double>> errors(g);
  for (std::size_t v = last + 1 - count; v <= last; ++v) {
    const auto prob = prepare_horizon(panel, horizon, cfg, v);
    const double actual = panel.target[v + horizon];
    for (std::size_t i = 0; i < g; ++i) {
      try {
        const auto fit = fit_two_step(prob.design, cfg.lambda_grid[i]);
        if (auto e = relative_error(actual, predict(fit, prob.origin_features))) errors[i].push_back(*e);
      } catch (const NumericalError&) {
        // this λ cannot be fit at v; it is scored on the remaining origins
      }
    }
  }
  std::vector<double> se(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    const auto& e = errors[i];
    if (e.empty()) continue;
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    sel.mean_error[i] = mean;
    if (e.size() > 1) {
      double ss = 0.0;
      for (double x : e) ss += (x - mean) * (x - mean);
      se[i] = std::sqrt(ss / static_cast<double>(e.size() - 1)) / std::sqrt(static_cast<double>(e.size()));
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(sel.mean_error.begin(), sel.mean_error.end()) - sel.mean_error.begin());
  if (!std::isfinite(sel.mean_error[best])) return sel;
  const double bound = sel.mean_error[best] + se[best];
  double chosen = cfg.lambda_grid[best];
  for (std::size_t i = 0; i < g; ++i)
    if (sel.mean_error[i] <= bound && cfg.lambda_grid[i] < chosen) chosen = cfg.lambda_grid[i];
  sel.lambda = chosen;
  return sel;
}

/// Two-step fit at `lambda`; when the weighted design cannot support it
/// (rank deficiency or non-convergence), the larger grid values are tried in
/// turn and, failing those, the intercept-only model at λ_max.
struct RobustFit {
  LinearModelFit fit;
  double lambda = 0.0;
  bool fallback = false;
};

inline RobustFit fit_with_fallback(const WeightedDesign& d, double lambda, const std::vector<double>& grid) {
  std::vector<double> tries{lambda};
  std::vector<double> larger;
  for (double l : grid)
    if (l > lambda) larger.push_back(l);
  std::sort(larger.begin(), larger.end());
  tries.insert(tries.end(), larger.begin(), larger.end());
  for (std::size_t i = 0; i < tries.size(); ++i) {
    try {
      return {fit_two_step(d, tries[i]), tries[i], i > 0};
    } catch (const NumericalError&) {
    }
  }
  const double lmax = lambda_max(d);
  return {fit_two_step(d, lmax), lmax, true};
}

struct ForecastRow {
  std::size_t origin = 0;
  std::string origin_date;
  std::size_t horizon = 0;
  double forecast = 0.0;
  double lambda = 0.0;     // penalty actually used
  bool fallback = false;   // the selected λ could not be fit; see fit_with_fallback
  WeightVector weights;
  std::vector<std::size_t> support;
  std::optional<double> actual;
  std::optional<double> relative_error;
};

struct ForecastPanel {
  std::vector<ForecastRow> rows;
  std::vector<ScreeningDecision> screening;
};

/// Forecasts y_{t+1}, ..., y_{t+ΔT} from the last index t of the panel. Factor
/// screening, λ selection and every fit use only the panel passed in. A
/// horizon whose selected λ cannot be fit falls back as in fit_with_fallback.
inline ForecastPanel forecast(const FactorPanel& panel, const ForecastConfig& cfg) {
  cfg.validate();
  panel.validate();
  if (panel.length() < min_history(cfg.horizons, cfg))
    throw DataError("insufficient history: " + std::to_string(cfg.horizons) + " horizons need " +
                    std::to_string(min_history(cfg.horizons, cfg)) + " observations, have " +
                    std::to_string(panel.length()));
  auto screened = screen_factors(panel, cfg.rho_min, cfg.rho_max);
  const std::size_t t = panel.length() - 1;
  ForecastPanel out;
  out.screening = std::move(screened.report);
  out.rows.resize(cfg.horizons);
  parallel_for(cfg.horizons, cfg.threads, [&](std::size_t i) {
    const std::size_t h = i + 1;
    const auto sel = select_lambda(screened.panel, h, cfg, t);
    auto prob = prepare_horizon(screened.panel, h, cfg, t);
    const auto rf = fit_with_fallback(prob.design, sel.lambda, cfg.lambda_grid);
    ForecastRow& row = out.rows[i];
    row.origin = t;
    row.origin_date = panel.dates[t];
    row.horizon = h;
    row.forecast = predict(rf.fit, prob.origin_features);
    row.lambda = rf.lambda;
    row.fallback = rf.fallback;
    row.weights = std::move(prob.weights);
    row.support = rf.fit.support;
  });
  return out;
}

struct HorizonSummary {
  std::size_t horizon = 0;
  double mean_relative_error = 0.0;  // over rows with a defined relative error
  std::size_t count = 0;
  std::size_t undefined = 0;         // rows with actual == 0
};

struct BacktestResult {
  std::vector<ForecastRow> rows;  // origin-major, then horizon
  std::vector<HorizonSummary> summary;
};

inline std::vector<HorizonSummary> summarize(const std::vector<ForecastRow>& rows, std::size_t horizons) {
  std::vector<HorizonSummary> s(horizons);
  std::vector<double> sums(horizons, 0.0);
  for (std::size_t h = 0; h < horizons; ++h) s[h].horizon = h + 1;
  for (const auto& r : rows) {
    auto& hs = s.at(r.horizon - 1);
    if (r.relative_error) {
      sums[r.horizon - 1] += *r.relative_error;
      ++hs.count;
    } else {
      ++hs.undefined;
    }
  }
  for (std::size_t h = 0; h < horizons; ++h)
    s[h].mean_relative_error = s[h].count ? sums[h] / static_cast<double>(s[h].count) : 0.0;
  return s;
}

/// Forecast from each origin using the panel truncated at that origin, and
/// score every horizon against the realized values.
inline BacktestResult backtest(const FactorPanel& panel, const ForecastConfig& cfg,
                               const std::vector<std::size_t>& origins) {
  cfg.validate();
  panel.validate();
  for (auto o : origins)
    if (o + cfg.horizons >= panel.length())
      throw DataError("backtest: origin " + std::to_string(o) + " leaves fewer than " +
                      std::to_string(cfg.horizons) + " future observations");
  ForecastConfig inner = cfg;
  inner.threads = 1;
  std::vector<std::vector<ForecastRow>> per(origins.size());
  parallel_for(origins.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t o = origins[i];
    auto fc = forecast(panel.truncated(o + 1), inner);
    for (auto& row : fc.rows) {
      row.actual = panel.target[o + row.horizon];
      row.relative_error = sigfc::relative_error(*row.actual, row.forecast);
    }
    per[i] = std::move(fc.rows);
  });
  BacktestResult res;
  for (auto& v : per)
    for (auto& r : v) res.rows.push_back(std::move(r));
  res.summary = summarize(res.rows, cfg.horizons);
  return res;
}

// ---------------------------------------------------------------------------
// Synthetic regime-switching panels

struct Regime {
  double trend = 0.0;               // slope per step
  double seasonal_amplitude = 0.0;
  double seasonal_period = 12.0;    // steps
  double seasonal_phase = 0.0;      // radians
  double noise = 0.0;               // std dev of additive Gaussian noise
  std::vector<double> loadings;     // one per factor
};

struct RegimeSpec {
  std::size_t length = 200;
  std::size_t factors = 0;
  double level = 10.0;
  double factor_persistence = 0.8;  // AR(1) coefficient of each factor
  double factor_volatility = 1.0;   // AR(1) innovation std dev
  std::vector<Regime> regimes;
  // (start index, regime id), sorted by start; empty means regime 0 throughout.
  std::vector<std::pair<std::size_t, std::size_t>> schedule;
  std::string start_date = "2018-01-07";
  std::size_t step_days = 7;
};

struct SyntheticPanel {
  FactorPanel panel;
  std::vector<std::size_t> regime;  // active regime per index
  std::vector<double> phase;        // seasonal phase angle per index (radians)
};

/// y_τ = level + trend(τ) + A sin(2π τ / P + φ) + Σ_j b_j x_j(τ) + σ ε_τ with
/// the parameters of the regime active at τ; trend is continuous across
/// switches. Factors are independent AR(1) series. Deterministic in `seed`.
inline SyntheticPanel gen_synthetic(std::uint64_t seed, const RegimeSpec& spec) {
  if (spec.regimes.empty()) throw InvalidArgument("gen_synthetic: no regimes");
  detail::require(spec.length >= 1, "gen_synthetic: length must be >= 1");
  for (const auto& r : spec.regimes) {
    detail::require(r.loadings.empty() || r.loadings.size() == spec.factors,
                    "gen_synthetic: loadings must match the factor count");
    detail::require(r.seasonal_period > 0.0, "gen_synthetic: seasonal period must be > 0");
  }
  for (std::size_t i = 0; i < spec.schedule.size(); ++i) {
    detail::require(spec.schedule[i].second < spec.regimes.size(), "gen_synthetic: unknown regime id");
    detail::require(i == 0 || spec.schedule[i].first > spec.schedule[i - 1].first,
                    "gen_synthetic: schedule must be sorted by start index");
  }
  const auto start = dates::parse(spec.start_date);
  if (!start) throw InvalidArgument("gen_synthetic: bad start date '" + spec.start_date + "'");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticPanel out;
  const std::size_t n = spec.length;
  out.panel.factors.assign(spec.factors, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < spec.factors; ++j) out.panel.factor_names.push_back("f" + std::to_string(j + 1));
  for (std::size_t j = 0; j < spec.factors; ++j) {
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x = spec.factor_persistence * x + spec.factor_volatility * normal(rng);
      out.panel.factors[j][i] = x;
    }
  }

  std::size_t sched = 0;
  std::size_t active = spec.schedule.empty() ? 0 : spec.schedule.front().second;
  std::size_t segment_start = 0;
  double segment_anchor = 0.0;  // trend value at segment_start
  out.panel.target.resize(n);
  out.panel.dates.resize(n);
  out.regime.resize(n);
  out.phase.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (sched < spec.schedule.size() && spec.schedule[sched].first <= i) {
      if (i > 0 && spec.schedule[sched].second != active) {
        segment_anchor += spec.regimes[active].trend * static_cast<double>(i - segment_start);
        segment_start = i;
      }
      active = spec.schedule[sched].second;
      ++sched;
    }
    const Regime& r = spec.regimes[active];
    const double trend = segment_anchor + r.trend * static_cast<double>(i - segment_start);
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / r.seasonal_period + r.seasonal_phase;
    double y = spec.level + trend + r.seasonal_amplitude * std::sin(angle);
    for (std::size_t j = 0; j < r.loadings.size(); ++j) y += r.loadings[j] * out.panel.factors[j][i];
    if (r.noise > 0.0) y += r.noise * normal(rng);
    out.panel.target[i] = y;
    out.regime[i] = active;
    out.phase[i] = angle;
    out.panel.dates[i] = dates::format(*start + std::chrono::days{static_cast<long>(i * spec.step_days)});
  }
  return out;
}

}  // namespace sigfc
