#pragma once

// Signatures of discrete data streams under piecewise-linear interpolation.
//
// A stream x_1, ..., x_n is read as the path that visits the points in order
// along straight segments. Its depth-N signature is the ordered product
//   exp(x_2 - x_1) ⊠ exp(x_3 - x_2) ⊠ ... ⊠ exp(x_n - x_{n-1}),
// accumulated one segment at a time with fused_mul_exp.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigfc/error.hpp"
#include "sigfc/tensor_algebra.hpp"

namespace sigfc {

/// Ordered sequence of n >= 1 points in R^d, stored row-major, with optional
/// strictly increasing timestamps.
class DataStream {
 public:
  DataStream(std::size_t dim, std::vector<double> points,
             std::optional<std::vector<double>> timestamps = std::nullopt)
      : dim_(dim), points_(std::move(points)), timestamps_(std::move(timestamps)) {
    detail::require(dim_ >= 1, "DataStream: dimension must be >= 1");
    if (points_.empty()) throw InvalidArgument("DataStream: empty stream");
    if (points_.size() % dim_ != 0)
      throw InvalidArgument("DataStream: point buffer is not a multiple of the dimension");
    if (timestamps_) {
      if (timestamps_->size() != length())
        throw InvalidArgument("DataStream: timestamp count differs from point count");
      for (std::size_t i = 1; i < timestamps_->size(); ++i)
        if (!((*timestamps_)[i] > (*timestamps_)[i - 1]))
          throw InvalidArgument("DataStream: timestamps must be strictly increasing");
    }
  }

  /// From a list of points; all must share one dimension.
  static DataStream from_points(const std::vector<std::vector<double>>& pts,
                                std::optional<std::vector<double>> timestamps = std::nullopt) {
    if (pts.empty()) throw InvalidArgument("DataStream: empty stream");
    const std::size_t d = pts.front().size();
    std::vector<double> flat;
    flat.reserve(d * pts.size());
    for (const auto& p : pts) {
      if (p.size() != d) throw InvalidArgument("DataStream: points have mixed dimensions");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return {d, std::move(flat), std::move(timestamps)};
  }

  /// One-dimensional stream from a scalar series.
  static DataStream from_series(std::span<const double> values) {
    return {1, std::vector<double>(values.begin(), values.end())};
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t length() const noexcept { return points_.size() / dim_; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points_).subspan(i * dim_, dim_);
  }
  std::span<const double> points() const noexcept { return points_; }
  const std::optional<std::vector<double>>& timestamps() const noexcept { return timestamps_; }

  /// Points [first, last) as a new stream (timestamps carried along).
  DataStream slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > length()) throw InvalidArgument("DataStream: bad slice range");
    std::vector<double> pts(points_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                            points_.begin() + static_cast<std::ptrdiff_t>(last * dim_));
    std::optional<std::vector<double>> ts;
    if (timestamps_)
      ts.emplace(timestamps_->begin() + static_cast<std::ptrdiff_t>(first),
                 timestamps_->begin() + static_cast<std::ptrdiff_t>(last));
    return {dim_, std::move(pts), std::move(ts)};
  }

 private:
  std::size_t dim_;
  std::vector<double> points_;
  std::optional<std::vector<double>> timestamps_;
};

/// A stream in R^{d+1} whose coordinate 0 is strictly increasing time.
class AugmentedStream {
 public:
  explicit AugmentedStream(DataStream s) : stream_(std::move(s)) {
    detail::require(stream_.dim() >= 2, "AugmentedStream: needs a time coordinate plus data");
    for (std::size_t i = 1; i < stream_.length(); ++i)
      if (!(stream_.point(i)[0] > stream_.point(i - 1)[0]))
        throw InvalidArgument("AugmentedStream: time coordinate must strictly increase");
  }
  const DataStream& stream() const noexcept { return stream_; }
  std::size_t dim() const noexcept { return stream_.dim(); }

 private:
  DataStream stream_;
};

/// Total number of entries of a depth-N tensor over R^d: Σ_{k=0..N} d^k.
inline std::size_t sig_dim(std::size_t dim, std::size_t depth) {
  detail::require(dim >= 1, "sig_dim: dimension must be >= 1");
  if (dim == 1) return detail::checked_add(depth, 1);
  std::size_t total = 0;
  std::size_t level = 1;
  for (std::size_t k = 0; k <= depth; ++k) {
    total = detail::checked_add(total, level);
    if (k < depth) level = detail::checked_mul(level, dim);
  }
  return total;
}

/// Extend the signature of a stream ending at `last_point` by one more point.
inline GradedTensor signature_update(const GradedTensor& prev, std::span<const double> new_point,
                                     std::span<const double> last_point,
                                     OpCounter* counter = nullptr) {
  if (new_point.size() != prev.dim() || last_point.size() != prev.dim())
    throw InvalidArgument("signature_update: point dimension does not match the tensor");
  std::vector<double> inc(prev.dim());
  for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = new_point[i] - last_point[i];
  return fused_mul_exp(prev, inc, counter);
}

/// Depth-N signature of the piecewise-linear interpolation of the stream.
/// Timestamps are ignored: the signature is invariant to reparameterization.
inline GradedTensor signature(const DataStream& s, std::size_t depth,
                              OpCounter* counter = nullptr) {
  GradedTensor sig = GradedTensor::unit(s.dim(), depth);
  std::vector<double> inc(s.dim());
  for (std::size_t i = 1; i < s.length(); ++i) {
    auto cur = s.point(i);
    auto prev = s.point(i - 1);
    for (std::size_t j = 0; j < inc.size(); ++j) inc[j] = cur[j] - prev[j];
    sig = fused_mul_exp(sig, inc, counter);
  }
  return sig;
}

inline GradedTensor signature(const AugmentedStream& s, std::size_t depth) {
  return signature(s.stream(), depth);
}

/// Prepend time as coordinate 0. Uses the stream's timestamps when present,
/// otherwise the indices 0..n-1 rescaled to [0, 1] (a single point gets t = 0).
inline AugmentedStream augment_time(const DataStream& s) {
  const std::size_t n = s.length();
  const std::size_t d = s.dim();
  std::vector<double> pts;
  pts.reserve(n * (d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    double t;
    if (s.timestamps())
      t = (*s.timestamps())[i];
    else
      t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    pts.push_back(t);
    auto p = s.point(i);
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return AugmentedStream(DataStream(d + 1, std::move(pts), s.timestamps()));
}

/// Level-major, row-major concatenation of all levels; length sig_dim(d, N).
inline std::vector<double> flatten(const GradedTensor& t) {
  auto f = t.flat();
  return {f.begin(), f.end()};
}

inline GradedTensor unflatten(std::span<const double> flat, std::size_t dim, std::size_t depth) {
  return {dim, depth, flat};
}

/// Multi-index of flat entry `pos` within its level, most significant first.
inline std::vector<std::size_t> multi_index(std::size_t dim, std::size_t order, std::size_t pos) {
  std::vector<std::size_t> idx(order);
  for (std::size_t k = order; k-- > 0;) {
    idx[k] = pos % dim;
    pos /= dim;
  }
  return idx;
}

}  // namespace sigfc
