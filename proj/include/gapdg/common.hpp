// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gapdg {

namespace detail {
// 17 significant digits: doubles survive a text round trip exactly.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

/// Point or vector in parametric/physical space, D = 2 or 3.
template <int D>
using Vec = std::array<double, D>;

template <std::size_t N>
inline std::array<double, N> operator+(const std::array<double, N>& a,
                                       const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
inline std::array<double, N> operator-(const std::array<double, N>& a,
                                       const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
inline std::array<double, N> operator*(double s, const std::array<double, N>& a) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t N>
inline std::array<double, N>& operator+=(std::array<double, N>& a,
                                         const std::array<double, N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
inline double norm(const std::array<double, N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline double dist(const std::array<double, N>& a, const std::array<double, N>& b) {
  return norm(a - b);
}

/// Small dense D x D matrix, row-major.
template <int D>
struct Mat {
  std::array<double, D * D> m{};

  double& operator()(int r, int c) { return m[r * D + c]; }
  double operator()(int r, int c) const { return m[r * D + c]; }

  double det() const {
    if constexpr (D == 2) {
      return m[0] * m[3] - m[1] * m[2];
    } else {
      return m[0] * (m[4] * m[8] - m[5] * m[7]) -
             m[1] * (m[3] * m[8] - m[5] * m[6]) +
             m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
  }

  Mat<D> inverse() const {
    const double d = det();
    Mat<D> inv;
    if constexpr (D == 2) {
      inv.m = {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
    } else {
      inv.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
               (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
               (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
               (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
               (m[0] * m[4] - m[1] * m[3]) / d};
    }
    return inv;
  }

  Vec<D> apply(const Vec<D>& v) const {
    Vec<D> r{};
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  // y = M^T v, used for gradient pullbacks with M = (D Phi)^{-1}.
  Vec<D> apply_transposed(const Vec<D>& v) const {
    Vec<D> r{};
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) r[i] += (*this)(j, i) * v[j];
    return r;
  }
};

/// Geometry map is singular or inverted (nonpositive Jacobian determinant).
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Newton inversion of a patch map failed to converge.
struct InversionError : std::runtime_error {
  explicit InversionError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear solver failure (singular factorization or non-convergence).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gapdg
