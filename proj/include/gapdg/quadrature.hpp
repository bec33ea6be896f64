// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gapdg/common.hpp"

namespace gapdg {

/// Tensor Gauss-Legendre rule on the reference element [0,1]^M.
template <int M>
struct QuadratureRule {
  std::vector<Vec<M>> nodes;
  std::vector<double> weights;
};

namespace detail {
/// 1D Gauss-Legendre nodes/weights on [0,1] via Newton on the Legendre
/// polynomial.
inline void gauss_legendre_1d(int n, std::vector<double>& nodes,
                              std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}
}  // namespace detail

/// Tensor product of n-point 1D Gauss-Legendre rules; exact for polynomials
/// of degree 2n-1 per direction.
template <int M>
QuadratureRule<M> gauss_rule(int n) {
  if (n < 1 || n > 10) throw std::invalid_argument("gauss_rule: n out of range [1,10]");
  std::vector<double> x1, w1;
  detail::gauss_legendre_1d(n, x1, w1);
  QuadratureRule<M> rule;
  std::array<int, M> j{};
  while (true) {
    Vec<M> p;
    double w = 1.0;
    for (int d = 0; d < M; ++d) {
      p[d] = x1[j[d]];
      w *= w1[j[d]];
    }
    rule.nodes.push_back(p);
    rule.weights.push_back(w);
    int d = 0;
    while (d < M && ++j[d] == n) j[d++] = 0;
    if (d == M) break;
  }
  return rule;
}

/// Span of one element per direction.
template <int M>
using ElementBox = std::array<std::pair<double, double>, M>;

/// Integrate `f` over an axis-aligned box by mapping the reference rule.
template <int M>
double element_integrate(const QuadratureRule<M>& rule, const ElementBox<M>& box,
                         const std::function<double(const Vec<M>&)>& f) {
  double measure = 1.0;
  for (int d = 0; d < M; ++d) measure *= box[d].second - box[d].first;
  if (measure <= 0) throw std::invalid_argument("element_integrate: empty element");
  double sum = 0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    Vec<M> x;
    for (int d = 0; d < M; ++d)
      x[d] = box[d].first + (box[d].second - box[d].first) * rule.nodes[q][d];
    sum += rule.weights[q] * f(x);
  }
  return sum * measure;
}

}  // namespace gapdg
