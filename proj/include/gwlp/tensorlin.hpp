#pragma once

// Dense complex matrices, Kronecker products, and application of a
// Kronecker-factored operator to a vector without forming the product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gwlp/common.hpp"

namespace gwlp {

using ComplexVector = std::vector<Complex>;

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InvalidArgument("ComplexMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  ComplexMatrix scaled(Complex factor) const {
    ComplexMatrix out = *this;
    for (auto& x : out.data_) x *= factor;
    return out;
  }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidArgument("ComplexMatrix product: inner dimensions differ");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const Complex x = a(i, l);
        if (x == Complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += x * b(l, j);
      }
    return out;
  }

  friend ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> v) {
    if (a.cols_ != v.size()) throw InvalidArgument("ComplexMatrix * vector: shape mismatch");
    ComplexVector out(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Complex acc{};
      for (std::size_t j = 0; j < a.cols_; ++j) acc += a(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) { return combine(a, b, 1.0); }
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) { return combine(a, b, -1.0); }

  /// Largest entrywise modulus of the difference; infinity on shape mismatch.
  double max_abs_diff(const ComplexMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return INFINITY;
    double m = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
    return m;
  }

 private:
  static ComplexMatrix combine(const ComplexMatrix& a, const ComplexMatrix& b, double sign) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw InvalidArgument("ComplexMatrix: shape mismatch");
    ComplexMatrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += sign * b.data_[i];
    return out;
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Block form [a_ij B].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          std::uint64_t entry_cap = Limits{}.kron_entries) {
  const std::uint64_t rows = detail::checked_mul(a.rows(), b.rows(), "kron");
  const std::uint64_t cols = detail::checked_mul(a.cols(), b.cols(), "kron");
  if (detail::checked_mul(rows, cols, "kron") > entry_cap) {
    throw ResourceLimit("kron: " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds entry cap " + std::to_string(entry_cap));
  }
  ComplexMatrix out(rows, cols);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex x = a(i, j);
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) out(i * b.rows() + p, j * b.cols() + q) = x * b(p, q);
    }
  return out;
}

/// Left-to-right Kronecker product of a list; the empty list gives the 1x1 identity.
inline ComplexMatrix kron(std::span<const ComplexMatrix> factors,
                          std::uint64_t entry_cap = Limits{}.kron_entries) {
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (const auto& f : factors) out = kron(out, f, entry_cap);
  return out;
}

inline ComplexVector kron(std::span<const Complex> v, std::span<const Complex> w) {
  ComplexVector out;
  out.reserve(v.size() * w.size());
  for (const Complex x : v)
    for (const Complex y : w) out.push_back(x * y);
  return out;
}

inline double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const Complex x : v) acc += std::norm(x);
  return acc;
}

inline double norm(std::span<const Complex> v) { return std::sqrt(squared_norm(v)); }

/// Applies kron(factors...) to `v` in place. Factor 0 acts on the most
/// significant mixed-radix digit. Each factor is swept along its own axis,
/// so the cost is O(len(v) * sum of factor sizes) with one scratch buffer.
inline void factored_apply_in_place(std::span<const ComplexMatrix> factors, std::span<Complex> v) {
  std::uint64_t total = 1;
  for (const auto& f : factors) {
    if (f.rows() != f.cols()) throw InvalidArgument("factored_apply: factors must be square");
    total = detail::checked_mul(total, f.rows(), "factored_apply");
  }
  if (total != v.size()) {
    throw InvalidArgument("factored_apply: vector length " + std::to_string(v.size()) +
                          " does not match factor product " + std::to_string(total));
  }

  std::size_t inner = v.size();
  std::vector<Complex> fiber;
  for (const auto& f : factors) {
    const std::size_t n = f.rows();
    inner /= n;
    const std::size_t block = n * inner;
    fiber.resize(n);
    for (std::size_t base = 0; base < v.size(); base += block) {
      for (std::size_t offset = 0; offset < inner; ++offset) {
        Complex* const start = v.data() + base + offset;
        for (std::size_t j = 0; j < n; ++j) fiber[j] = start[j * inner];
        for (std::size_t i = 0; i < n; ++i) {
          Complex acc{};
          const auto row = f.row(i);
          for (std::size_t j = 0; j < n; ++j) acc += row[j] * fiber[j];
          start[i * inner] = acc;
        }
      }
    }
  }
}

inline ComplexVector factored_apply(std::span<const ComplexMatrix> factors, ComplexVector v) {
  factored_apply_in_place(factors, v);
  return v;
}

/// Per-coordinate projector kind: P keeps only coordinate 0, Q = I - P.
enum class FactorKind { P, Q, I };

inline ComplexMatrix projector_factor(FactorKind kind, std::size_t size) {
  if (size == 0) throw InvalidArgument("projector_factor: size must be positive");
  ComplexMatrix m = ComplexMatrix::identity(size);
  switch (kind) {
    case FactorKind::P:
      m = ComplexMatrix(size, size);
      m(0, 0) = 1.0;
      break;
    case FactorKind::Q:
      m(0, 0) = 0.0;
      break;
    case FactorKind::I:
      break;
  }
  return m;
}

/// Dense kron of per-coordinate projectors. Testing aid only; refused
/// when the total size exceeds `size_cap`.
inline ComplexMatrix build_projector(std::span<const FactorKind> kinds, std::span<const std::size_t> sizes,
                                     std::uint64_t size_cap = Limits{}.projector) {
  if (kinds.size() != sizes.size()) throw InvalidArgument("build_projector: kinds and sizes differ in length");
  std::uint64_t total = 1;
  for (const auto s : sizes) total = detail::checked_mul(total, s, "build_projector");
  if (total > size_cap) {
    throw ResourceLimit("build_projector: size " + std::to_string(total) + " exceeds cap " +
                        std::to_string(size_cap));
  }
  std::vector<ComplexMatrix> factors;
  factors.reserve(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) factors.push_back(projector_factor(kinds[i], sizes[i]));
  return kron(factors, std::numeric_limits<std::uint64_t>::max());
}

}  // namespace gwlp
