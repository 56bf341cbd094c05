#pragma once

// Truncated free tensor algebra T^N(R^d) = R + R^d + (R^d)^{⊗2} + ... + (R^d)^{⊗N}.
//
// Every level is stored densely in row-major multi-index order, all levels
// packed back to back in a single buffer, so level k of a depth-N tensor
// starts at offset 1 + d + ... + d^{k-1}. The packed buffer is exactly the
// flattened feature vector used downstream.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sigfc/error.hpp"

namespace sigfc {

/// Tally of scalar multiplications (divisions count as multiplications by a
/// reciprocal). Pass one to the algebra routines to instrument them.
struct OpCounter {
  std::uint64_t multiplies = 0;
};

namespace detail {

inline std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    throw InvalidArgument("tensor size overflows size_t");
  return a * b;
}

inline std::size_t checked_add(std::size_t a, std::size_t b) {
  if (b > std::numeric_limits<std::size_t>::max() - a)
    throw InvalidArgument("tensor size overflows size_t");
  return a + b;
}

inline std::size_t checked_pow(std::size_t d, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r = checked_mul(r, d);
  return r;
}

inline void count(OpCounter* c, std::uint64_t n) {
  if (c != nullptr) c->multiplies += n;
}

}  // namespace detail

/// A single homogeneous level: an order-`order` tensor over R^dim with dim^order entries.
struct LevelRef {
  std::size_t dim = 1;
  std::size_t order = 0;
  std::span<const double> values;
};

/// Element of the truncated tensor algebra over R^d up to depth N.
class GradedTensor {
 public:
  GradedTensor() : GradedTensor(1, 0) {}

  GradedTensor(std::size_t dim, std::size_t depth) : dim_(dim), depth_(depth) {
    detail::require(dim >= 1, "GradedTensor: dimension must be >= 1");
    offsets_.reserve(depth + 2);
    std::size_t off = 0;
    std::size_t level = 1;
    for (std::size_t k = 0; k <= depth; ++k) {
      offsets_.push_back(off);
      off = detail::checked_add(off, level);
      if (k < depth) level = detail::checked_mul(level, dim);
    }
    offsets_.push_back(off);
    data_.assign(off, 0.0);
  }

  /// Rebuild from a flattened buffer (inverse of flat()).
  GradedTensor(std::size_t dim, std::size_t depth, std::span<const double> flat)
      : GradedTensor(dim, depth) {
    if (flat.size() != data_.size())
      throw InvalidArgument("GradedTensor: flat buffer has " + std::to_string(flat.size()) +
                            " entries, expected " + std::to_string(data_.size()));
    std::copy(flat.begin(), flat.end(), data_.begin());
  }

  static GradedTensor zero(std::size_t dim, std::size_t depth) { return {dim, depth}; }

  /// Group identity (1, 0, ..., 0).
  static GradedTensor unit(std::size_t dim, std::size_t depth) {
    GradedTensor t(dim, depth);
    t.data_[0] = 1.0;
    return t;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t level_size(std::size_t k) const { return offsets_.at(k + 1) - offsets_.at(k); }

  std::span<const double> level(std::size_t k) const {
    return {data_.data() + offsets_.at(k), level_size(k)};
  }
  std::span<double> level(std::size_t k) { return {data_.data() + offsets_.at(k), level_size(k)}; }

  LevelRef level_ref(std::size_t k) const { return {dim_, k, level(k)}; }

  double scalar() const noexcept { return data_[0]; }

  /// All levels packed in level-major, row-major order.
  std::span<const double> flat() const noexcept { return data_; }

  friend bool operator==(const GradedTensor&, const GradedTensor&) = default;

 private:
  std::size_t dim_;
  std::size_t depth_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

inline GradedTensor zero_like(std::size_t dim, std::size_t depth) {
  return GradedTensor::zero(dim, depth);
}

/// Outer product of two levels over the same R^d. The result has order
/// a.order + b.order; entry (i..., j...) is a[i...] * b[j...].
inline std::vector<double> tensor_product(const LevelRef& a, const LevelRef& b,
                                          OpCounter* counter = nullptr) {
  if (a.dim != b.dim)
    throw InvalidArgument("tensor_product: dimension mismatch (" + std::to_string(a.dim) +
                          " vs " + std::to_string(b.dim) + ")");
  if (a.values.size() != detail::checked_pow(a.dim, a.order) ||
      b.values.size() != detail::checked_pow(b.dim, b.order))
    throw InvalidArgument("tensor_product: level entry count does not match dim^order");
  std::vector<double> out(a.values.size() * b.values.size());
  std::size_t idx = 0;
  for (double x : a.values)
    for (double y : b.values) out[idx++] = x * y;
  detail::count(counter, out.size());
  return out;
}

namespace detail {

inline void require_group_element(const GradedTensor& t, const char* who) {
  if (t.scalar() != 1.0)
    throw InvalidArgument(std::string(who) + ": level 0 must equal 1");
}

inline void require_same_shape(const GradedTensor& a, const GradedTensor& b, const char* who) {
  if (a.dim() != b.dim() || a.depth() != b.depth())
    throw InvalidArgument(std::string(who) + ": (dim, depth) mismatch");
}

inline void require_finite(std::span<const double> v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgument(std::string(who) + ": non-finite input");
}

// out += a ⊗ b for flat levels of sizes na and nb.
inline void add_outer(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  std::size_t idx = 0;
  for (double x : a)
    for (double y : b) out[idx++] += x * y;
}

}  // namespace detail

/// Truncated product (A ⊠ B)_k = Σ_{j=0..k} A_j ⊗ B_{k-j}. Both operands must
/// have level 0 equal to 1; the result then does too.
inline GradedTensor boxtimes(const GradedTensor& a, const GradedTensor& b,
                             OpCounter* counter = nullptr) {
  detail::require_same_shape(a, b, "boxtimes");
  detail::require_group_element(a, "boxtimes");
  detail::require_group_element(b, "boxtimes");
  GradedTensor out = GradedTensor::unit(a.dim(), a.depth());
  for (std::size_t k = 1; k <= a.depth(); ++k) {
    auto dst = out.level(k);
    // j = 0 and j = k terms multiply by the unit scalar.
    auto ak = a.level(k);
    auto bk = b.level(k);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = ak[i] + bk[i];
    for (std::size_t j = 1; j < k; ++j) {
      detail::add_outer(a.level(j), b.level(k - j), dst);
      detail::count(counter, dst.size());
    }
  }
  return out;
}

/// Tensor exponential truncated at depth N: (1, v, v^{⊗2}/2!, ..., v^{⊗N}/N!).
inline GradedTensor exp_map(std::span<const double> v, std::size_t depth,
                            OpCounter* counter = nullptr) {
  detail::require(!v.empty(), "exp_map: empty vector");
  detail::require_finite(v, "exp_map");
  const std::size_t d = v.size();
  GradedTensor out = GradedTensor::unit(d, depth);
  if (depth == 0) return out;
  std::copy(v.begin(), v.end(), out.level(1).begin());
  std::vector<double> scaled(d);
  for (std::size_t k = 2; k <= depth; ++k) {
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < d; ++i) scaled[i] = v[i] * inv;
    detail::count(counter, d);
    auto prev = out.level(k - 1);
    auto dst = out.level(k);
    std::size_t idx = 0;
    for (double x : prev)
      for (double y : scaled) dst[idx++] = x * y;
    detail::count(counter, dst.size());
  }
  return out;
}

/// A ⊠ exp(z) evaluated level by level with the nested Horner scheme
///
///   (A ⊠ exp z)_k = ((...((z/k + A_1) ⊗ z/(k-1) + A_2) ⊗ ...) ⊗ z/2 + A_{k-1}) ⊗ z + A_k,
///
/// which costs O(d^N) multiplications instead of the O(N d^N) of the naive
/// exp-then-multiply route.
inline GradedTensor fused_mul_exp(const GradedTensor& a, std::span<const double> z,
                                  OpCounter* counter = nullptr) {
  detail::require_group_element(a, "fused_mul_exp");
  if (z.size() != a.dim())
    throw InvalidArgument("fused_mul_exp: increment has dimension " + std::to_string(z.size()) +
                          ", tensor has " + std::to_string(a.dim()));
  detail::require_finite(z, "fused_mul_exp");
  const std::size_t d = a.dim();
  const std::size_t depth = a.depth();
  GradedTensor out = a;
  if (depth == 0) return out;

  // scaled[m] = z / m for m = 1..N.
  std::vector<std::vector<double>> scaled(depth + 1);
  scaled[1].assign(z.begin(), z.end());
  for (std::size_t m = 2; m <= depth; ++m) {
    const double inv = 1.0 / static_cast<double>(m);
    scaled[m].resize(d);
    for (std::size_t i = 0; i < d; ++i) scaled[m][i] = z[i] * inv;
    detail::count(counter, d);
  }

  const std::size_t top = a.level_size(depth);
  std::vector<double> acc(top);
  std::vector<double> next(top);
  for (std::size_t k = depth; k >= 1; --k) {
    auto a1 = a.level(1);
    for (std::size_t i = 0; i < d; ++i) acc[i] = scaled[k][i] + a1[i];
    std::size_t width = d;
    for (std::size_t i = 2; i <= k; ++i) {
      const auto& factor = scaled[k - i + 1];
      auto ai = a.level(i);
      std::size_t idx = 0;
      for (std::size_t p = 0; p < width; ++p) {
        const double x = acc[p];
        for (std::size_t q = 0; q < d; ++q, ++idx) next[idx] = x * factor[q] + ai[idx];
      }
      width *= d;
      detail::count(counter, width);
      acc.swap(next);
    }
    std::copy_n(acc.begin(), width, out.level(k).begin());
  }
  return out;
}

/// Euclidean (Frobenius) norm of level k.
inline double level_norm(const GradedTensor& t, std::size_t k) {
  double s = 0.0;
  for (double x : t.level(k)) s += x * x;
  return std::sqrt(s);
}

inline double max_abs_diff(const GradedTensor& a, const GradedTensor& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto fa = a.flat();
  auto fb = b.flat();
  for (std::size_t i = 0; i < fa.size(); ++i) m = std::max(m, std::abs(fa[i] - fb[i]));
  return m;
}

}  // namespace sigfc
