// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gapdg/assembly.hpp"
#include "gapdg/geometry.hpp"

namespace gapdg {

/// A manufactured problem: exact solution (branch selected by the sign of
/// x_1 against the nominal interface), gradient, source f = -div(rho grad u),
/// Dirichlet data, diffusion coefficients, and the Sobolev exponents used
/// for rate prediction.
template <int D>
struct ProblemCase {
  std::string id;
  DiffusionCoefficients coeffs;
  ScalarField<D> exact;
  VectorField<D> exact_grad;
  ScalarField<D> source;
  ScalarField<D> dirichlet;
  double gamma = 0.0;     // ex3 singularity exponent, 0 otherwise
  double sobolev_l = 4.0; // u in W^{l,p} patchwise
  double sobolev_p = 2.0;
};

/// How the gap size is chosen when building a domain at a refinement level.
struct GapSpec {
  double lambda = 1.0;       // d_g = h^lambda
  bool explicit_dg = false;  // when set, use dg as-is
  double dg = 0.0;
};

inline int case_dimension(const std::string& id) {
  if (id == "ex1" || id == "ex2" || id == "ex3" || id == "linear") return 2;
  if (id == "ex4" || id == "ex5") return 3;
  throw std::invalid_argument("unknown case id: " + id);
}

namespace detail {

inline std::vector<Vec<2>> table_net_2d(PatchSide side) {
  if (side == PatchSide::left)
    return {{-1, -0.2}, {-0.75, 0},    {-0.5, 0},    {-0.25, 0},    {0, 0},
            {-1, 0.25}, {-0.75, 0.25}, {-0.5, 0.25}, {-0.25, 0.25}, {0, 0.25},
            {-1, 0.5},  {-0.75, 0.5},  {-0.5, 0.5},  {-0.25, 0.5},  {0, 0.5},
            {-1, 0.75}, {-0.75, 0.75}, {-0.5, 0.75}, {-0.25, 0.75}, {0, 0.75},
            {-1, 1.2},  {-0.75, 1},    {-0.5, 1},    {-0.25, 1},    {0, 1}};
  return {{0, 0},    {0.25, 0},    {0.5, 0},    {0.75, 0},    {1, 0.2},
          {0, 0.25}, {0.25, 0.25}, {0.5, 0.25}, {0.75, 0.25}, {1, 0.25},
          {0, 0.5},  {0.25, 0.5},  {0.5, 0.5},  {0.75, 0.5},  {1, 0.5},
          {0, 0.75}, {0.25, 0.75}, {0.5, 0.75}, {0.75, 0.75}, {1, 0.75},
          {0, 1},    {0.25, 1},    {0.5, 1},    {0.75, 1},    {1, 0.8}};
}

template <int D>
std::vector<Vec<D>> table_net(PatchSide side) {
  const auto net2 = table_net_2d(side);
  if constexpr (D == 2) {
    return net2;
  } else {
    // straight prolongation: replicate at x3 = 0, 0.25, 0.5, 0.75, 1
    std::vector<Vec<3>> net;
    net.reserve(net2.size() * 5);
    for (double z : {0.0, 0.25, 0.5, 0.75, 1.0})
      for (const auto& p : net2) net.push_back({p[0], p[1], z});
    return net;
  }
}

/// Unit gap displacement grid for one patch: spline coefficients of the
/// field zeta(tangential) * w(xhat_1) * e_1, where w decays linearly from
/// the interface face (w = xhat_1 on the left patch, 1 - xhat_1 on the
/// right). Exactly representable, so the displaced interface is exactly the
/// profile graph and refinement commutes with the displacement.
template <int D>
std::vector<Vec<D>> unit_displacement(PatchSide side, const KnotVector& coarse) {
  const std::vector<double> zeta = {0.0, 1.0, 1.0, 1.0, 0.0};
  const std::vector<double> grev = coarse.greville();
  const int n = coarse.num_basis();
  std::vector<Vec<D>> grid;
  if constexpr (D == 2) {
    grid.resize(n * n, Vec<2>{});
    for (int j2 = 0; j2 < n; ++j2)
      for (int j1 = 0; j1 < n; ++j1) {
        const double w = side == PatchSide::left ? grev[j1] : 1.0 - grev[j1];
        grid[j1 + n * j2][0] = w * zeta[j2];
      }
  } else {
    grid.resize(n * n * n, Vec<3>{});
    for (int j3 = 0; j3 < n; ++j3)
      for (int j2 = 0; j2 < n; ++j2)
        for (int j1 = 0; j1 < n; ++j1) {
          const double w = side == PatchSide::left ? grev[j1] : 1.0 - grev[j1];
          grid[j1 + n * (j2 + n * j3)][0] = w * zeta[j2] * zeta[j3];
        }
  }
  return grid;
}

}  // namespace detail

/// Two-patch domain from the built-in control nets, refined `level` times,
/// with the gap carved by displacing the interface control layers along the
/// nominal normal. split = 0 moves only the right patch; split = 0.5 makes
/// the gap symmetric about the nominal interface.
template <int D>
MultiPatchDomain<D> build_domain(int level, double d_g, double split = 0.0,
                                 double lambda_report = 1.0) {
  const KnotVector coarse = KnotVector::clamped(2, {{0.5, 2}});

  auto build_patch = [&](PatchSide side) {
    std::array<KnotVector, D> kvs = uniform_directions<D>(coarse);
    std::vector<Vec<D>> net = detail::table_net<D>(side);
    std::vector<Vec<D>> disp = detail::unit_displacement<D>(side, coarse);
    refine_grid_dyadic<D>(kvs, net, level);
    std::array<KnotVector, D> kvs2 = uniform_directions<D>(coarse);
    refine_grid_dyadic<D>(kvs2, disp, level);
    const double amount = side == PatchSide::left ? -split * d_g : (1.0 - split) * d_g;
    for (std::size_t i = 0; i < net.size(); ++i) net[i] += amount * disp[i];
    return PatchMap<D>(TensorBasis<D>(std::move(kvs)), std::move(net), side);
  };

  GapInterface<D> gap;
  gap.d_g = d_g;
  gap.lambda = lambda_report;
  gap.split = split;
  gap.profile = D == 2 ? GapProfile::parabola : GapProfile::bump;

  MultiPatchDomain<D> dom{build_patch(PatchSide::left), build_patch(PatchSide::right),
                          gap, {}};
  dom.boundary = default_boundary_faces<D>();
  return dom;
}

namespace detail {

template <int D>
ProblemCase<D> make_case(const std::string& id, double gamma) {
  ProblemCase<D> pc;
  pc.id = id;
  pc.gamma = gamma;

  if (id == "ex1") {
    pc.coeffs = DiffusionCoefficients::make(1.0, 1.0);
    pc.exact = [](const Vec<D>& x) { return std::sin(5 * M_PI * x[0]) * std::sin(4 * M_PI * x[1]); };
    pc.exact_grad = [](const Vec<D>& x) {
      Vec<D> g{};
      g[0] = 5 * M_PI * std::cos(5 * M_PI * x[0]) * std::sin(4 * M_PI * x[1]);
      g[1] = 4 * M_PI * std::sin(5 * M_PI * x[0]) * std::cos(4 * M_PI * x[1]);
      return g;
    };
    pc.source = [](const Vec<D>& x) {
      return 41 * M_PI * M_PI * std::sin(5 * M_PI * x[0]) * std::sin(4 * M_PI * x[1]);
    };
  } else if (id == "ex2" || id == "ex4") {
    pc.coeffs = DiffusionCoefficients::make(4 * M_PI, 1.0);
    pc.exact = [](const Vec<D>& x) {
      return x[0] < 0 ? std::exp(x[0]) - 1.0 : std::sin(4 * M_PI * x[0]);
    };
    pc.exact_grad = [](const Vec<D>& x) {
      Vec<D> g{};
      g[0] = x[0] < 0 ? std::exp(x[0]) : 4 * M_PI * std::cos(4 * M_PI * x[0]);
      return g;
    };
    pc.source = [](const Vec<D>& x) {
      return x[0] < 0 ? -4 * M_PI * std::exp(x[0])
                      : 16 * M_PI * M_PI * std::sin(4 * M_PI * x[0]);
    };
  } else if (id == "ex3") {
    pc.coeffs = DiffusionCoefficients::make(1.0, 1.0);
    const double g = gamma;
    auto r2 = [](const Vec<D>& x) {
      return x[0] * x[0] + (x[1] - 0.5) * (x[1] - 0.5);
    };
    pc.exact = [=](const Vec<D>& x) { return std::pow(r2(x), 0.5 * g); };
    pc.exact_grad = [=](const Vec<D>& x) {
      Vec<D> gr{};
      const double r = r2(x);
      if (r == 0.0) return gr;
      const double s = g * std::pow(r, 0.5 * g - 1.0);
      gr[0] = s * x[0];
      gr[1] = s * (x[1] - 0.5);
      return gr;
    };
    // radial Laplacian in 2D: lap r^g = g^2 r^{g-2}
    pc.source = [=](const Vec<D>& x) {
      const double r = r2(x);
      return r == 0.0 ? 0.0 : -g * g * std::pow(r, 0.5 * g - 1.0);
    };
    if (g >= 1.0) {
      pc.sobolev_l = g + 1.0;
      pc.sobolev_p = 2.0;
    } else {
      pc.sobolev_l = 2.0;
      pc.sobolev_p = std::floor(100.0 * 2.0 / (2.0 - g)) / 100.0;
    }
  } else if (id == "ex5") {
    pc.coeffs = DiffusionCoefficients::make(4.0, 1.0);
    pc.exact = [](const Vec<D>& x) {
      return x[0] < 0 ? std::sin(M_PI * (x[0] + x[1])) : std::sin(M_PI * (4 * x[0] + x[1]));
    };
    pc.exact_grad = [](const Vec<D>& x) {
      Vec<D> g{};
      const double c = x[0] < 0 ? M_PI * std::cos(M_PI * (x[0] + x[1]))
                                : M_PI * std::cos(M_PI * (4 * x[0] + x[1]));
      g[0] = (x[0] < 0 ? 1.0 : 4.0) * c;
      g[1] = c;
      return g;
    };
    pc.source = [](const Vec<D>& x) {
      return x[0] < 0 ? 8 * M_PI * M_PI * std::sin(M_PI * (x[0] + x[1]))
                      : 17 * M_PI * M_PI * std::sin(M_PI * (4 * x[0] + x[1]));
    };
  } else if (id == "linear") {
    pc.coeffs = DiffusionCoefficients::make(1.0, 1.0);
    pc.exact = [](const Vec<D>& x) { return 1.0 + 2.0 * x[0] + 3.0 * x[1]; };
    pc.exact_grad = [](const Vec<D>&) {
      Vec<D> g{};
      g[0] = 2.0;
      g[1] = 3.0;
      return g;
    };
    pc.source = [](const Vec<D>&) { return 0.0; };
  } else {
    throw std::invalid_argument("unknown case id: " + id);
  }
  pc.dirichlet = pc.exact;
  return pc;
}

}  // namespace detail

/// Exact-solution registry lookup (no domain construction).
template <int D>
ProblemCase<D> case_by_id(const std::string& id, double gamma = 0.0) {
  if (case_dimension(id) != D)
    throw std::invalid_argument("case " + id + " is not " + std::to_string(D) + "D");
  return detail::make_case<D>(id, gamma);
}

template <int D>
struct BuiltCase {
  MultiPatchDomain<D> domain;
  ProblemCase<D> problem;
  double h = 0;
  double d_g = 0;
};

/// Built-in case at a refinement level; d_g = h^lambda unless an explicit
/// value is given. Example 5 carries the symmetric straddling gap.
template <int D>
BuiltCase<D> build_case(const std::string& id, int level, const GapSpec& gap,
                        double gamma = 0.0) {
  if (level < 0) throw std::invalid_argument("build_case: level < 0");
  ProblemCase<D> pc = case_by_id<D>(id, gamma);
  const double h = 0.5 / static_cast<double>(1 << level);
  const double d_g = gap.explicit_dg ? gap.dg : std::pow(h, gap.lambda);
  const double split = id == "ex5" ? 0.5 : 0.0;
  MultiPatchDomain<D> dom = build_domain<D>(level, d_g, split, gap.lambda);
  return {std::move(dom), std::move(pc), h, d_g};
}

enum class ExactQuantity { value, gradient_x1, source };

/// Scalar probe of a case's exact data; branch chosen by subdomain
/// membership against the nominal interface.
template <int D>
double exact_eval(const ProblemCase<D>& pc, const Vec<D>& x, ExactQuantity which) {
  switch (which) {
    case ExactQuantity::value: return pc.exact(x);
    case ExactQuantity::gradient_x1: return pc.exact_grad(x)[0];
    default: return pc.source(x);
  }
}

}  // namespace gapdg
