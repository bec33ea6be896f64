// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the test suites.
#pragma once

#include <random>
#include <vector>

#include "gapdg/assembly.hpp"
#include "gapdg/cases.hpp"
#include "gapdg/geometry.hpp"

namespace gapdg::testing {

/// Patch on [0,1]^D whose map is the identity (Greville control net).
template <int D>
PatchMap<D> identity_patch(int levels = 0, PatchSide side = PatchSide::left,
                           int degree = 2) {
  KnotVector kv = KnotVector::clamped(degree, {{0.5, degree}}).refine_dyadic(levels);
  const auto g = kv.greville();
  const int n = kv.num_basis();
  std::vector<Vec<D>> net;
  if constexpr (D == 2) {
    for (int j2 = 0; j2 < n; ++j2)
      for (int j1 = 0; j1 < n; ++j1) net.push_back({g[j1], g[j2]});
  } else {
    for (int j3 = 0; j3 < n; ++j3)
      for (int j2 = 0; j2 < n; ++j2)
        for (int j1 = 0; j1 < n; ++j1) net.push_back({g[j1], g[j2], g[j3]});
  }
  return PatchMap<D>(TensorBasis<D>(uniform_directions<D>(kv)), std::move(net), side);
}

/// Affine image of the identity patch: x -> diag(s) x + shift.
template <int D>
PatchMap<D> affine_patch(const Vec<D>& scale, const Vec<D>& shift, int levels = 0) {
  PatchMap<D> p = identity_patch<D>(levels);
  std::vector<Vec<D>> net = p.control_points();
  for (auto& c : net)
    for (int d = 0; d < D; ++d) c[d] = scale[d] * c[d] + shift[d];
  return PatchMap<D>(p.basis(), std::move(net), p.label());
}

/// Independent matching-interface assembler: classic interior-penalty
/// coupling on the shared face written in jump/average form over a single
/// face loop. Valid only for d_g = 0 domains.
template <int D>
void assemble_matching_interface_oracle(const Discretization<D>& disc,
                                        const DiffusionCoefficients& coeffs, double mu,
                                        SystemMatrix& A) {
  const auto rule = gauss_rule<D - 1>(disc.quad_n);
  const PatchFace face_l = MultiPatchDomain<D>::gap_face(PatchSide::left);
  const PatchFace face_r = MultiPatchDomain<D>::gap_face(PatchSide::right);
  const PatchMap<D>&geom_l = disc.domain.left, &geom_r = disc.domain.right;
  const TensorBasis<D>&space_l = disc.space_l, &space_r = disc.space_r;
  const int m = disc.degree + 1;
  int nloc = 1;
  for (int d = 0; d < D; ++d) nloc *= m;
  const double avg_rho = 0.5 * (coeffs.rho_l + coeffs.rho_r);

  std::vector<Vec<D>> gl(nloc), gr(nloc);
  std::vector<int> il(nloc), ir(nloc);

  for (const auto& box : detail::face_elements<D>(space_l, face_l)) {
    const double measure = detail::box_measure<D - 1>(box);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vec<D - 1> t = detail::box_point<D - 1>(box, rule.nodes[q]);
      const auto fp = patch_face_point(geom_l, face_l, t);
      const Vec<D> xhat_r =
          geom_r.inverse_map(fp.x, face_param_to_xhat<D>(face_r, t));

      const auto lv_l = space_l.tensor_eval(fp.xhat, 1);
      const auto lv_r = space_r.tensor_eval(xhat_r, 1);
      const Mat<D> inv_l = geom_l.jacobian(fp.xhat).J.inverse();
      const Mat<D> inv_r = geom_r.jacobian(xhat_r).J.inverse();
      detail::for_each_local(space_l, lv_l, [&](int flat, int global) {
        gl[flat] = inv_l.apply_transposed(lv_l.gradients[flat]);
        il[flat] = global;
      });
      detail::for_each_local(space_r, lv_r, [&](int flat, int global) {
        gr[flat] = inv_r.apply_transposed(lv_r.gradients[flat]);
        ir[flat] = disc.dofmap.offset(PatchSide::right) + global;
      });

      const double w = rule.weights[q] * measure * fp.surface_jacobian;
      const double pen = mu * avg_rho / disc.h;
      // -{rho grad u}.n [phi] + pen [u][phi], jump oriented by n = n_{F_l}
      for (int c = 0; c < nloc; ++c) {
        for (int a = 0; a < nloc; ++a) {
          const double flux_l = 0.5 * coeffs.rho_l * dot(gl[a], fp.normal);
          const double flux_r = 0.5 * coeffs.rho_r * dot(gr[a], fp.normal);
          // test with phi_l
          A.add(il[c], il[a], w * (-flux_l * lv_l.values[c] + pen * lv_l.values[a] * lv_l.values[c]));
          A.add(il[c], ir[a], w * (-flux_r * lv_l.values[c] - pen * lv_r.values[a] * lv_l.values[c]));
          // test with -phi_r (jump)
          A.add(ir[c], il[a], w * (flux_l * lv_r.values[c] - pen * lv_l.values[a] * lv_r.values[c]));
          A.add(ir[c], ir[a], w * (flux_r * lv_r.values[c] + pen * lv_r.values[a] * lv_r.values[c]));
        }
      }
    }
  }
}

/// max_i |a_i - b_i|
inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Schoenberg variation-diminishing interpolant: control coefficients are
/// exact-solution values at the mapped Greville points. Reproduces linears.
template <int D>
std::vector<double> greville_interpolant(const Discretization<D>& disc,
                                         const ScalarField<D>& u) {
  std::vector<double> coeffs(disc.dofmap.total(), 0.0);
  for (const PatchSide s : {PatchSide::left, PatchSide::right}) {
    const auto& space = disc.space(s);
    const auto& geom = disc.domain.patch(s);
    std::array<std::vector<double>, D> g;
    for (int d = 0; d < D; ++d) g[d] = space.direction(d).greville();
    const auto dims = space.dims();
    std::array<int, D> j{};
    const int off = disc.dofmap.offset(s);
    while (true) {
      Vec<D> xhat;
      for (int d = 0; d < D; ++d) xhat[d] = g[d][j[d]];
      coeffs[off + space.global_index(j)] = u(geom.map_point(xhat));
      int d = 0;
      while (d < D && ++j[d] == dims[d]) j[d++] = 0;
      if (d == D) break;
    }
  }
  return coeffs;
}

}  // namespace gapdg::testing
