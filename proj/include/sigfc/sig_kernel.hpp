#pragma once

// Truncated signature kernel, its induced distance, and adaptive sample
// weights from kernel similarity to the most recent window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sigfc/error.hpp"
#include "sigfc/signature.hpp"

namespace sigfc {

struct KernelConfig {
  std::size_t depth = 3;      // signature truncation N >= 1
  std::size_t window = 8;     // window spans l+1 points
  double temperature = 1.0;   // gamma >= 0
  bool augment = true;        // time-augment windows before signing

  void validate() const {
    detail::require(depth >= 1, "KernelConfig: depth must be >= 1");
    detail::require(temperature >= 0.0 && std::isfinite(temperature),
                    "KernelConfig: temperature must be finite and >= 0");
  }
};

/// Nonnegative sample weights summing to one. Entry i belongs to sample
/// index i; samples without a complete window carry weight 0.
struct WeightVector {
  std::vector<double> weights;
  std::size_t horizon = 1;

  double sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

namespace detail {

inline std::vector<double> feature_map(const DataStream& s, const KernelConfig& cfg) {
  if (cfg.augment) return flatten(signature(augment_time(s), cfg.depth));
  return flatten(signature(s, cfg.depth));
}

inline void require_same_dim(const DataStream& a, const DataStream& b, const char* who) {
  if (a.dim() != b.dim()) throw InvalidArgument(std::string(who) + ": stream dimension mismatch");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ‖a - b‖², which equals <a,a> - 2<a,b> + <b,b> but cannot go negative.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace detail

/// k(a, b) = <Sig^N(a), Sig^N(b)> over flattened signatures.
inline double sig_kernel(const DataStream& a, const DataStream& b, const KernelConfig& cfg) {
  detail::require_same_dim(a, b, "sig_kernel");
  cfg.validate();
  return detail::dot(detail::feature_map(a, cfg), detail::feature_map(b, cfg));
}

/// d(a, b) = k(a, a) - 2 k(a, b) + k(b, b).
inline double sig_distance(const DataStream& a, const DataStream& b, const KernelConfig& cfg) {
  detail::require_same_dim(a, b, "sig_distance");
  cfg.validate();
  return detail::squared_distance(detail::feature_map(a, cfg), detail::feature_map(b, cfg));
}

/// w_i = exp(-γ δ_i) / Σ_j exp(-γ δ_j) over the given distances. The
/// minimum distance is subtracted first so the largest term is exp(0).
inline std::vector<double> softmax_weights(std::span<const double> delta, double temperature) {
  detail::require(!delta.empty(), "softmax_weights: no distances");
  detail::require(temperature >= 0.0, "softmax_weights: temperature must be >= 0");
  const double lo = *std::min_element(delta.begin(), delta.end());
  std::vector<double> w(delta.size());
  double total = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    w[i] = temperature == 0.0 ? 1.0 : std::exp(-temperature * (delta[i] - lo));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

/// Per-coordinate scale used to standardize windows: population standard
/// deviation of each coordinate over the given stream, with 1 substituted
/// for (near-)constant coordinates.
inline std::vector<double> pooled_scale(const DataStream& s, double eps = 1e-12) {
  const std::size_t n = s.length();
  const std::size_t d = s.dim();
  std::vector<double> mean(d, 0.0);
  std::vector<double> scale(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += s.point(i)[j];
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = s.point(i)[j] - mean[j];
      scale[j] += diff * diff;
    }
  for (double& v : scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > eps)) v = 1.0;
  }
  return scale;
}

/// Window of points [end - window, end] of `s`, centred on its own mean and
/// divided coordinate-wise by `scale`.
inline DataStream standardized_window(const DataStream& s, std::size_t end, std::size_t window,
                                      std::span<const double> scale) {
  const std::size_t d = s.dim();
  const std::size_t first = end - window;
  const std::size_t len = window + 1;
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = first; i <= end; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += s.point(i)[j];
  for (double& m : mean) m /= static_cast<double>(len);
  std::vector<double> pts;
  pts.reserve(len * d);
  for (std::size_t i = first; i <= end; ++i)
    for (std::size_t j = 0; j < d; ++j) pts.push_back((s.point(i)[j] - mean[j]) / scale[j]);
  return {d, std::move(pts)};
}

/// δ_τ = d_{Sig,N}(window ending at τ, window ending at `reference_end`) for
/// every τ in [window, count). Entries τ < window are left at 0 and are not
/// meaningful. Windows are standardized with the scale pooled over every
/// point up to max(count - 1, reference_end).
inline std::vector<double> window_distances(const DataStream& s, const KernelConfig& cfg,
                                            std::size_t count, std::size_t reference_end) {
  cfg.validate();
  detail::require(count <= s.length() && reference_end < s.length(),
                  "window_distances: index out of range");
  detail::require(reference_end >= cfg.window, "window_distances: incomplete reference window");
  const auto scale = pooled_scale(s.slice(0, std::max(count, reference_end + 1)));
  const auto ref = detail::feature_map(standardized_window(s, reference_end, cfg.window, scale), cfg);
  std::vector<double> delta(count, 0.0);
  for (std::size_t tau = cfg.window; tau < count; ++tau) {
    const auto phi = detail::feature_map(standardized_window(s, tau, cfg.window, scale), cfg);
    delta[tau] = detail::squared_distance(phi, ref);
  }
  return delta;
}

/// Softmax weights over samples τ in [window, count), zero below.
inline WeightVector weights_from_distances(std::span<const double> delta, std::size_t window,
                                           double temperature, std::size_t horizon) {
  detail::require(delta.size() > window, "weights_from_distances: no eligible samples");
  const auto w = softmax_weights(delta.subspan(window), temperature);
  WeightVector out;
  out.horizon = horizon;
  out.weights.assign(delta.size(), 0.0);
  std::copy(w.begin(), w.end(), out.weights.begin() + static_cast<std::ptrdiff_t>(window));
  return out;
}

/// Adaptive weights for the samples z_0, ..., z_{m-1} (rows of `samples`,
/// z_τ = (x_τ, y_{τ+Δt})). Each sample with a complete window z_{τ-l..τ} is
/// scored by its signature distance to the most recent window z_{m-1-l..m-1}
/// and weighted by a softmax with temperature γ. Samples τ < l get weight 0.
inline WeightVector ada_weights(const DataStream& samples, const KernelConfig& cfg,
                                std::size_t horizon) {
  cfg.validate();
  detail::require(horizon >= 1, "ada_weights: horizon must be >= 1");
  const std::size_t m = samples.length();
  if (m < cfg.window + 1)
    throw DataError("ada_weights: " + std::to_string(m) + " samples cannot fill a window of " +
                    std::to_string(cfg.window + 1) + " points");
  const auto delta = window_distances(samples, cfg, m, m - 1);
  return weights_from_distances(delta, cfg.window, cfg.temperature, horizon);
}

}  // namespace sigfc
