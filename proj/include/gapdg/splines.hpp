// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gapdg/common.hpp"

namespace gapdg {

/// Open (clamped) knot vector on [0,1] for one parametric direction.
///
/// The first and last knots are repeated degree+1 times; interior knots may
/// be repeated up to degree+1 times. Evaluation follows the Cox-de Boor
/// recursion with the right-limit convention at interior knots (left limit
/// at x = 1).
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots)
      : degree_(degree), knots_(std::move(knots)) {
    validate();
  }

  /// Clamped knot vector with the given interior breakpoints/multiplicities.
  static KnotVector clamped(int degree,
                            const std::vector<std::pair<double, int>>& interior = {}) {
    std::vector<double> kts(degree + 1, 0.0);
    for (const auto& [x, mult] : interior)
      for (int i = 0; i < mult; ++i) kts.push_back(x);
    for (int i = 0; i <= degree; ++i) kts.push_back(1.0);
    return KnotVector(degree, std::move(kts));
  }

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }

  bool operator==(const KnotVector& other) const {
    return degree_ == other.degree_ && knots_ == other.knots_;
  }

  /// Nonempty spans [knots[i], knots[i+1]) as (lo, hi) pairs.
  std::vector<std::pair<double, double>> spans() const {
    std::vector<std::pair<double, double>> s;
    const int n = num_basis();
    for (int i = degree_; i < n; ++i)
      if (knots_[i + 1] > knots_[i]) s.emplace_back(knots_[i], knots_[i + 1]);
    return s;
  }

  /// Largest span length.
  double mesh_size() const {
    double h = 0;
    for (const auto& [lo, hi] : spans()) h = std::max(h, hi - lo);
    return h;
  }

  /// Greville abscissae: coefficients of the identity function x -> x.
  std::vector<double> greville() const {
    const int n = num_basis();
    std::vector<double> g(n, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int i = 1; i <= degree_; ++i) g[j] += knots_[j + i];
      g[j] /= std::max(degree_, 1);
    }
    return g;
  }

  /// Quasi-uniformity ratio: max ratio of adjacent span lengths (>= 1).
  double quasi_uniformity() const {
    const auto s = spans();
    double theta = 1.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double a = s[i].second - s[i].first, b = s[i + 1].second - s[i + 1].first;
      theta = std::max({theta, a / b, b / a});
    }
    return theta;
  }

  /// Index of the nonempty span containing x; right-limit convention, left
  /// limit at x = 1.
  int find_span(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("KnotVector: x outside [0,1]");
    const int n = num_basis();
    // search among knots[degree..n]; span index i satisfies knots[i] <= x < knots[i+1]
    auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
    int span = static_cast<int>(it - knots_.begin()) - 1;
    span = std::min(span, n - 1);
    while (span > degree_ && knots_[span + 1] <= knots_[span]) --span;
    return span;
  }

  /// Cox-de Boor evaluation: the degree+1 basis values that can be nonzero
  /// at x. Values are nonnegative and sum to one.
  ///
  /// `values` must have room for degree+1 entries; returns the index of the
  /// first of them.
  int eval_basis(double x, std::span<double> values) const {
    const int k = degree_;
    const int span = find_span(x);
    std::vector<double> left(k + 1), right(k + 1);
    values[0] = 1.0;
    for (int j = 1; j <= k; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double temp = values[r] / (right[r + 1] + left[j - r]);
        values[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      values[j] = saved;
    }
    return span - k;
  }

  /// Values and derivatives up to `order`. Row i of `ders` (row-major,
  /// (order+1) x (degree+1)) holds the i-th derivatives; rows past the
  /// degree are zero. Row 0 matches eval_basis.
  int eval_basis_derivs(double x, int order, std::span<double> ders) const {
    const int k = degree_;
    const int span = find_span(x);
    const int n = order;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= k; ++j) ders[i * (k + 1) + j] = 0.0;

    // Triangular table of basis values and knot differences (ndu), then the
    // standard derivative recurrence on top of it.
    std::vector<double> left(k + 1), right(k + 1);
    std::vector<double> ndu((k + 1) * (k + 1));
    auto NDU = [&](int i, int j) -> double& { return ndu[i * (k + 1) + j]; };
    NDU(0, 0) = 1.0;
    for (int j = 1; j <= k; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        NDU(j, r) = right[r + 1] + left[j - r];
        const double temp = NDU(r, j - 1) / NDU(j, r);
        NDU(r, j) = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      NDU(j, j) = saved;
    }
    for (int j = 0; j <= k; ++j) ders[j] = NDU(j, k);

    const int nd = std::min(n, k);
    std::vector<double> a(2 * (k + 1));
    for (int r = 0; r <= k; ++r) {
      int s1 = 0, s2 = 1;
      a[0] = 1.0;
      for (int kk = 1; kk <= nd; ++kk) {
        double d = 0.0;
        const int rk = r - kk, pk = k - kk;
        if (r >= kk) {
          a[s2 * (k + 1)] = a[s1 * (k + 1)] / NDU(pk + 1, rk);
          d = a[s2 * (k + 1)] * NDU(rk, pk);
        }
        const int j1 = (rk >= -1) ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? kk - 1 : k - r;
        for (int j = j1; j <= j2; ++j) {
          a[s2 * (k + 1) + j] =
              (a[s1 * (k + 1) + j] - a[s1 * (k + 1) + j - 1]) / NDU(pk + 1, rk + j);
          d += a[s2 * (k + 1) + j] * NDU(rk + j, pk);
        }
        if (r <= pk) {
          a[s2 * (k + 1) + kk] = -a[s1 * (k + 1) + kk - 1] / NDU(pk + 1, r);
          d += a[s2 * (k + 1) + kk] * NDU(r, pk);
        }
        ders[kk * (k + 1) + r] = d;
        std::swap(s1, s2);
      }
    }
    double fac = k;
    for (int kk = 1; kk <= nd; ++kk) {
      for (int j = 0; j <= k; ++j) ders[kk * (k + 1) + j] *= fac;
      fac *= k - kk;
    }
    return span - k;
  }

  /// Midpoint knot insertion into every nonempty span, `levels` times.
  /// Halves the mesh size per level and keeps the degree.
  KnotVector refine_dyadic(int levels) const {
    if (levels < 0) throw std::invalid_argument("refine_dyadic: levels < 0");
    KnotVector kv = *this;
    for (int l = 0; l < levels; ++l) {
      const auto s = kv.spans();
      for (const auto& [lo, hi] : s) kv = insert_knot_only(kv, 0.5 * (lo + hi));
    }
    return kv;
  }

 private:
  static KnotVector insert_knot_only(const KnotVector& kv, double x) {
    std::vector<double> kts = kv.knots_;
    kts.insert(std::upper_bound(kts.begin(), kts.end(), x), x);
    return KnotVector(kv.degree_, std::move(kts));
  }

  void validate() const {
    const int k = degree_;
    if (k < 0) throw std::invalid_argument("KnotVector: negative degree");
    const int m = static_cast<int>(knots_.size());
    if (m < 2 * (k + 1)) throw std::invalid_argument("KnotVector: too few knots");
    for (int i = 0; i + 1 < m; ++i)
      if (knots_[i] > knots_[i + 1])
        throw std::invalid_argument("KnotVector: knots not nondecreasing");
    for (int i = 0; i <= k; ++i)
      if (knots_[i] != 0.0 || knots_[m - 1 - i] != 1.0)
        throw std::invalid_argument("KnotVector: not open on [0,1]");
    // interior multiplicity at most degree+1
    int run = 1;
    for (int i = k + 1; i < m - k - 1; ++i) {
      run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
      if (run > k + 1) throw std::invalid_argument("KnotVector: interior multiplicity > degree+1");
    }
    if (num_basis() < k + 1) throw std::invalid_argument("KnotVector: basis count < degree+1");
  }

  int degree_;
  std::vector<double> knots_;
};

namespace detail {
// Coefficient blend used by knot insertion; overloads define what a
// "coefficient" can be (scalar, point, or a row of a refinement operator).
inline double coeff_lerp(const double& prev, const double& cur, double alpha) {
  return alpha * cur + (1.0 - alpha) * prev;
}
template <std::size_t N>
inline std::array<double, N> coeff_lerp(const std::array<double, N>& prev,
                                        const std::array<double, N>& cur, double alpha) {
  return alpha * cur + (1.0 - alpha) * prev;
}
inline std::vector<double> coeff_lerp(const std::vector<double>& prev,
                                      const std::vector<double>& cur, double alpha) {
  std::vector<double> r(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i)
    r[i] = alpha * cur[i] + (1.0 - alpha) * prev[i];
  return r;
}
}  // namespace detail

/// Single knot insertion (Boehm) updating spline coefficients so the
/// represented function is unchanged. Returns the refined knot vector.
template <class Coeff>
KnotVector insert_knot(const KnotVector& kv, double x, std::vector<Coeff>& coeffs) {
  const int k = kv.degree();
  const int n = kv.num_basis();
  if (static_cast<int>(coeffs.size()) != n)
    throw std::invalid_argument("insert_knot: coefficient count mismatch");
  const int span = kv.find_span(x);
  const auto& U = kv.knots();

  std::vector<Coeff> out;
  out.reserve(n + 1);
  for (int j = 0; j <= span - k; ++j) out.push_back(coeffs[j]);
  for (int j = span - k + 1; j <= span; ++j) {
    const double alpha = (x - U[j]) / (U[j + k] - U[j]);
    out.push_back(detail::coeff_lerp(coeffs[j - 1], coeffs[j], alpha));
  }
  for (int j = span; j < n; ++j) out.push_back(coeffs[j]);
  coeffs = std::move(out);

  std::vector<double> kts = U;
  kts.insert(std::upper_bound(kts.begin(), kts.end(), x), x);
  return KnotVector(k, std::move(kts));
}

/// Dyadic refinement with coefficient update: the spline with the returned
/// coefficients on the refined knot vector equals the input spline.
template <class Coeff>
KnotVector refine_dyadic_with_coeffs(const KnotVector& kv, int levels,
                                     std::vector<Coeff>& coeffs) {
  KnotVector out = kv;
  for (int l = 0; l < levels; ++l) {
    const auto s = out.spans();
    for (const auto& [lo, hi] : s) out = insert_knot(out, 0.5 * (lo + hi), coeffs);
  }
  return out;
}

/// Knot insertion along one direction of a tensor-product coefficient grid
/// (lexicographic storage, direction 1 fastest). The represented tensor
/// spline is unchanged.
template <int D, class T>
void insert_knot_grid(std::array<KnotVector, D>& kvs, std::vector<T>& grid, int dir,
                      double x) {
  std::array<int, D> n;
  for (int d = 0; d < D; ++d) n[d] = kvs[d].num_basis();
  int stride = 1;
  for (int d = 0; d < dir; ++d) stride *= n[d];
  const int nlines = static_cast<int>(grid.size()) / n[dir];

  std::vector<T> out(grid.size() / n[dir] * (n[dir] + 1));
  KnotVector refined = kvs[dir];
  for (int line = 0; line < nlines; ++line) {
    const int low = line % stride, high = line / stride;
    std::vector<T> coeffs(n[dir]);
    for (int t = 0; t < n[dir]; ++t) coeffs[t] = grid[low + (high * n[dir] + t) * stride];
    refined = insert_knot(kvs[dir], x, coeffs);
    for (int t = 0; t <= n[dir]; ++t)
      out[low + (high * (n[dir] + 1) + t) * stride] = coeffs[t];
  }
  kvs[dir] = refined;
  grid = std::move(out);
}

/// Dyadic refinement of a tensor coefficient grid in every direction.
template <int D, class T>
void refine_grid_dyadic(std::array<KnotVector, D>& kvs, std::vector<T>& grid, int levels) {
  for (int l = 0; l < levels; ++l)
    for (int dir = 0; dir < D; ++dir) {
      const auto spans = kvs[dir].spans();
      for (const auto& [lo, hi] : spans) insert_knot_grid<D>(kvs, grid, dir, 0.5 * (lo + hi));
    }
}

/// D copies of the same knot vector (KnotVector has no default constructor).
template <int D>
std::array<KnotVector, D> uniform_directions(const KnotVector& kv) {
  if constexpr (D == 2)
    return {kv, kv};
  else
    return {kv, kv, kv};
}

/// Tensor-product B-spline basis on [0,1]^D.
template <int D>
class TensorBasis {
 public:
  explicit TensorBasis(std::array<KnotVector, D> kvs) : kvs_(std::move(kvs)) {}

  const KnotVector& direction(int d) const { return kvs_[d]; }
  int degree() const { return kvs_[0].degree(); }

  /// Total basis count n_1 * ... * n_D.
  int dim() const {
    int n = 1;
    for (const auto& kv : kvs_) n *= kv.num_basis();
    return n;
  }

  std::array<int, D> dims() const {
    std::array<int, D> n;
    for (int d = 0; d < D; ++d) n[d] = kvs_[d].num_basis();
    return n;
  }

  /// Lexicographic global index, direction 1 fastest.
  int global_index(const std::array<int, D>& j) const {
    int idx = 0;
    for (int d = D - 1; d >= 0; --d) idx = idx * kvs_[d].num_basis() + j[d];
    return idx;
  }

  /// Tensorized nonempty spans; element (lo, hi) per direction.
  std::vector<std::array<std::pair<double, double>, D>> elements() const {
    std::array<std::vector<std::pair<double, double>>, D> per_dir;
    for (int d = 0; d < D; ++d) per_dir[d] = kvs_[d].spans();
    std::vector<std::array<std::pair<double, double>, D>> out;
    std::array<std::size_t, D> idx{};
    while (true) {
      std::array<std::pair<double, double>, D> e;
      for (int d = 0; d < D; ++d) e[d] = per_dir[d][idx[d]];
      out.push_back(e);
      int d = 0;
      while (d < D && ++idx[d] == per_dir[d].size()) idx[d++] = 0;
      if (d == D) break;
    }
    return out;
  }

  /// Max span length over all directions.
  double mesh_size() const {
    double h = 0;
    for (const auto& kv : kvs_) h = std::max(h, kv.mesh_size());
    return h;
  }

  double quasi_uniformity() const {
    double theta = 1.0;
    for (const auto& kv : kvs_) theta = std::max(theta, kv.quasi_uniformity());
    return theta;
  }

  TensorBasis<D> refine_dyadic(int levels) const {
    std::array<KnotVector, D> kvs = kvs_;
    for (auto& kv : kvs) kv = kv.refine_dyadic(levels);
    return TensorBasis<D>(std::move(kvs));
  }

  /// Local values (and parametric gradients, when order >= 1) of the
  /// (degree+1)^D basis functions that can be nonzero at xhat.
  /// Ordering is lexicographic with direction 1 fastest; `first` holds the
  /// per-direction index of the first local function.
  struct LocalValues {
    std::array<int, D> first;
    std::vector<double> values;     // (k+1)^D
    std::vector<Vec<D>> gradients;  // empty when order = 0
  };

  LocalValues tensor_eval(const Vec<D>& xhat, int order) const {
    const int k = degree();
    const int m = k + 1;
    std::array<std::vector<double>, D> uni;  // per direction: (order+1) x m
    LocalValues lv;
    for (int d = 0; d < D; ++d) {
      uni[d].resize(2 * m);
      lv.first[d] = kvs_[d].eval_basis_derivs(xhat[d], order >= 1 ? 1 : 0,
                                              std::span<double>(uni[d]));
    }
    int total = 1;
    for (int d = 0; d < D; ++d) total *= m;
    lv.values.resize(total);
    if (order >= 1) lv.gradients.resize(total);

    std::array<int, D> j{};
    for (int flat = 0; flat < total; ++flat) {
      double v = 1.0;
      for (int d = 0; d < D; ++d) v *= uni[d][j[d]];
      lv.values[flat] = v;
      if (order >= 1) {
        Vec<D> g;
        for (int gd = 0; gd < D; ++gd) {
          double p = 1.0;
          for (int d = 0; d < D; ++d) p *= (d == gd) ? uni[d][m + j[d]] : uni[d][j[d]];
          g[gd] = p;
        }
        lv.gradients[flat] = g;
      }
      int d = 0;
      while (d < D && ++j[d] == m) j[d++] = 0;
    }
    return lv;
  }

 private:
  std::array<KnotVector, D> kvs_;
};

}  // namespace gapdg
