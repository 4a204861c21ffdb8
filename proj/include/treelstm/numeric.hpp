#pragma once

// Dense real vectors/matrices, activations, seeded randomness and the
// finite-difference gradient oracle shared by the rest of the library.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treelstm/errors.hpp"

namespace treelstm {

using Real = double;

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, Real fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<Real> values) : data_(values) {}
  explicit Vector(std::vector<Real> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Real& operator[](std::size_t i) noexcept { return data_[i]; }
  Real operator[](std::size_t i) const noexcept { return data_[i]; }

  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }
  std::span<Real> span() noexcept { return data_; }
  std::span<const Real> span() const noexcept { return data_; }
  const std::vector<Real>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  Vector& operator+=(const Vector& o) {
    check_same(o, "Vector +=");
    for (std::size_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  void check_same(const Vector& o, const char* what) const {
    if (o.size() != size()) {
      throw DimensionError(std::string(what) + ": sizes " + std::to_string(size()) + " and " +
                           std::to_string(o.size()));
    }
  }

  std::vector<Real> data_;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Real> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
      throw DimensionError("Matrix: " + std::to_string(data_.size()) + " values for shape " +
                           shape_string(rows, cols));
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  Real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }
  std::span<Real> flat() noexcept { return data_; }
  std::span<const Real> flat() const noexcept { return data_; }
  const std::vector<Real>& values() const noexcept { return data_; }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape() const { return shape_string(rows_, cols_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  static std::string shape_string(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

// ---------------------------------------------------------------------------
// Linear algebra

/// W·[x;1]. The last column of W holds the bias.
inline Vector affine(const Matrix& w, std::span<const Real> x) {
  if (w.cols() != x.size() + 1) {
    throw DimensionError("affine: weight shape " + w.shape() + " does not accept input of size " +
                         std::to_string(x.size()) + " (needs " +
                         Matrix::shape_string(w.rows(), x.size() + 1) + ")");
  }
  Vector out(w.rows());
  const std::size_t m = x.size();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    Real acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) acc += row[c] * x[c];
    out[r] = acc + row[m];
  }
  return out;
}

inline Vector affine(const Matrix& w, const Vector& x) { return affine(w, x.span()); }

/// y += A·x
inline void matvec_accumulate(const Matrix& a, std::span<const Real> x, Vector& y) {
  if (a.cols() != x.size() || a.rows() != y.size()) {
    throw DimensionError("matvec: matrix " + a.shape() + ", input " + std::to_string(x.size()) +
                         ", output " + std::to_string(y.size()));
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    Real acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

/// y += Aᵀ·x
inline void matvec_transpose_accumulate(const Matrix& a, std::span<const Real> x,
                                        std::span<Real> y) {
  if (a.rows() != x.size() || a.cols() != y.size()) {
    throw DimensionError("matvec_transpose: matrix " + a.shape() + ", input " +
                         std::to_string(x.size()) + ", output " + std::to_string(y.size()));
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    const Real xr = x[r];
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
  }
}

/// G += u·vᵀ, with v optionally augmented by a trailing 1 (bias column).
inline void outer_accumulate(Matrix& g, std::span<const Real> u, std::span<const Real> v,
                             bool bias_column) {
  const std::size_t width = v.size() + (bias_column ? 1 : 0);
  if (g.rows() != u.size() || g.cols() != width) {
    throw DimensionError("outer: matrix " + g.shape() + " vs " +
                         Matrix::shape_string(u.size(), width));
  }
  for (std::size_t r = 0; r < g.rows(); ++r) {
    auto row = g.row(r);
    const Real ur = u[r];
    for (std::size_t c = 0; c < v.size(); ++c) row[c] += ur * v[c];
    if (bias_column) row[v.size()] += ur;
  }
}

inline Real dot(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: sizes " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  Real acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline bool all_finite(std::span<const Real> v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Activations

inline Real sigmoid(Real v) noexcept {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const Real e = std::exp(v);
  return e / (1.0 + e);
}

inline Vector sigmoid(const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

inline Vector tanh(const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

/// Softmax restricted to `active` slots of `logits`; every other slot is exactly 0.
/// `active` must be non-empty and hold indices below logits.size().
inline Vector masked_softmax(std::span<const Real> logits, std::span<const std::size_t> active) {
  if (active.empty()) throw InvalidArgument("masked_softmax: empty active set");
  Real peak = -std::numeric_limits<Real>::infinity();
  for (const std::size_t i : active) {
    if (i >= logits.size()) {
      throw InvalidArgument("masked_softmax: active index " + std::to_string(i) +
                            " outside " + std::to_string(logits.size()) + " slots");
    }
    peak = std::max(peak, logits[i]);
  }
  Vector weights(logits.size(), 0.0);
  Real total = 0.0;
  for (const std::size_t i : active) {
    weights[i] = std::exp(logits[i] - peak);
    total += weights[i];
  }
  for (const std::size_t i : active) weights[i] /= total;
  return weights;
}

// ---------------------------------------------------------------------------
// Randomness

/// xoshiro256** seeded through splitmix64. Portable, so every platform sees the same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  Real uniform() noexcept { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("Rng::below: zero bound");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = 0;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  /// Standard normal via Box–Muller; the second variate is cached.
  Real normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    Real u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const Real u2 = uniform();
    const Real radius = std::sqrt(-2.0 * std::log(u1));
    const Real angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_[4]{};
  Real spare_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. N(0, variance) entries.
inline Matrix gaussian_init(Rng& rng, std::size_t rows, std::size_t cols, Real variance) {
  if (!(variance > 0.0)) {
    throw InvalidArgument("gaussian_init: variance must be positive, got " +
                          std::to_string(variance));
  }
  const Real stddev = std::sqrt(variance);
  Matrix m(rows, cols);
  for (auto& v : m.flat()) v = stddev * rng.normal();
  return m;
}

inline Vector gaussian_vector(Rng& rng, std::size_t n, Real variance) {
  const Matrix m = gaussian_init(rng, n, 1, variance);
  return Vector(m.values());
}

// ---------------------------------------------------------------------------
// Finite differences

/// Central-difference gradient of `f` at `theta`; step h for every coordinate.
inline std::vector<Real> finite_diff_grad(const std::function<Real(std::span<const Real>)>& f,
                                          std::span<const Real> theta, Real h) {
  std::vector<Real> point(theta.begin(), theta.end());
  std::vector<Real> grad(theta.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    const Real saved = point[j];
    point[j] = saved + h;
    const Real up = f(point);
    point[j] = saved - h;
    const Real down = f(point);
    point[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace treelstm
