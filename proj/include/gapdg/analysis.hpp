// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "gapdg/assembly.hpp"
#include "gapdg/cases.hpp"

namespace gapdg {

/// Squared contributions to the broken dG norm, kept per patch:
/// rho |grad v|^2 volumes, rho/h boundary traces, {rho}/h interface traces.
struct ErrorBreakdown {
  double grad_l = 0, grad_r = 0;
  double bdry_l = 0, bdry_r = 0;
  double face_l = 0, face_r = 0;
  double dg_total = 0;
  double l2_total = 0;

  double sum_parts() const { return grad_l + grad_r + bdry_l + bdry_r + face_l + face_r; }
};

/// Squared error parts for one patch of v = u - u_h (pass zero callables to
/// measure a discrete function itself).
template <int D>
struct PatchErrorParts {
  double grad2 = 0;
  double bdry2 = 0;
  double face2 = 0;
  double l2sq = 0;
};

template <int D>
PatchErrorParts<D> patch_error_parts(const PatchMap<D>& geom, const TensorBasis<D>& space,
                                     std::span<const double> coeffs,
                                     const std::type_identity_t<ScalarField<D>>& u, const std::type_identity_t<VectorField<D>>& grad_u,
                                     double rho, double rho_face_avg, double h,
                                     const std::vector<PatchFace>& boundary_faces,
                                     const PatchFace* interface_face, int vol_n,
                                     int face_n) {
  PatchErrorParts<D> parts;
  const auto vrule = gauss_rule<D>(vol_n);
  for (const auto& box : space.elements()) {
    const double measure = detail::box_measure<D>(box);
    for (std::size_t q = 0; q < vrule.nodes.size(); ++q) {
      const Vec<D> xhat = detail::box_point<D>(box, vrule.nodes[q]);
      const auto fv = eval_field(geom, space, coeffs, xhat);
      const Vec<D> x = geom.map_point(xhat);
      const double dv = (u ? u(x) : 0.0) - fv.value;
      const Vec<D> dg = grad_u ? grad_u(x) - fv.grad : -1.0 * fv.grad;
      const double w = vrule.weights[q] * measure * geom.jacobian(xhat).det;
      parts.grad2 += w * rho * dot(dg, dg);
      parts.l2sq += w * dv * dv;
    }
  }

  const auto frule = gauss_rule<D - 1>(face_n);
  auto face_trace2 = [&](const PatchFace& face) {
    double acc = 0;
    for (const auto& box : detail::face_elements<D>(space, face)) {
      const double measure = detail::box_measure<D - 1>(box);
      for (std::size_t q = 0; q < frule.nodes.size(); ++q) {
        const Vec<D - 1> t = detail::box_point<D - 1>(box, frule.nodes[q]);
        const auto fp = patch_face_point(geom, face, t);
        const auto fv = eval_field(geom, space, coeffs, fp.xhat);
        const double dv = (u ? u(fp.x) : 0.0) - fv.value;
        acc += frule.weights[q] * measure * fp.surface_jacobian * dv * dv;
      }
    }
    return acc;
  };
  for (const auto& face : boundary_faces) parts.bdry2 += (rho / h) * face_trace2(face);
  if (interface_face) parts.face2 += (rho_face_avg / h) * face_trace2(*interface_face);
  return parts;
}

/// Broken dG-norm and L2 error of u - u_h over the whole domain. Volume
/// quadrature uses degree+2 points per direction, traces degree+3.
template <int D>
ErrorBreakdown dg_error(const Discretization<D>& disc, std::span<const double> u_h,
                        const std::type_identity_t<ScalarField<D>>& u, const std::type_identity_t<VectorField<D>>& grad_u,
                        const DiffusionCoefficients& coeffs) {
  ErrorBreakdown out;
  for (const PatchSide s : {PatchSide::left, PatchSide::right}) {
    std::vector<PatchFace> bfaces;
    for (const auto& bf : disc.domain.boundary)
      if (bf.side == s) bfaces.push_back(bf.face);
    const PatchFace gap_face = MultiPatchDomain<D>::gap_face(s);
    const auto parts = patch_error_parts<D>(
        disc.domain.patch(s), disc.space(s),
        u_h.subspan(disc.dofmap.offset(s), disc.dofmap.dim(s)), u, grad_u, coeffs.rho(s),
        coeffs.face_average(s), disc.h, bfaces, &gap_face, disc.degree + 2,
        disc.degree + 3);
    if (s == PatchSide::left) {
      out.grad_l = parts.grad2;
      out.bdry_l = parts.bdry2;
      out.face_l = parts.face2;
    } else {
      out.grad_r = parts.grad2;
      out.bdry_r = parts.bdry2;
      out.face_r = parts.face2;
    }
    out.l2_total += parts.l2sq;
  }
  out.dg_total = std::sqrt(out.sum_parts());
  out.l2_total = std::sqrt(out.l2_total);
  return out;
}

/// log-ratio convergence rates; rates[0] is NaN, as is any entry following
/// a nonpositive error.
inline std::vector<double> observed_rates(const std::vector<double>& errors,
                                          const std::vector<double>& hs) {
  if (errors.size() != hs.size())
    throw std::invalid_argument("observed_rates: size mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rates(errors.size(), nan);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) throw std::invalid_argument("observed_rates: h not decreasing");
    if (errors[i] <= 0 || errors[i - 1] <= 0) continue;
    rates[i] = std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]);
  }
  return rates;
}

/// Predicted convergence orders: the gap-flux consistency order beta and the
/// spline approximation order delta_pi, from the regularity exponents
/// (l, p) of the solution, the space dimension and the gap exponent lambda.
struct RatePrediction {
  double lambda = 1;
  double p = 2;
  int d = 2;
  double l = 2;
  double gamma_pd = 0;
  double zeta_exp = 0;
  double beta = 0;
  double delta_pi = 0;

  /// Overall expected rate, capped by the spline degree.
  double predicted_rate(int degree) const {
    return std::min(beta, std::min(delta_pi, static_cast<double>(degree)));
  }
};

inline RatePrediction predict_orders(double lambda, double p, int d, double l) {
  const double p_lo = std::max(1.0, 2.0 * d / (d + 2.0 * (l - 1.0)));
  if (!(p > p_lo && p <= 2.0))
    throw std::invalid_argument("predict_orders: p outside admissible range");
  if (!(lambda >= 1.0)) throw std::invalid_argument("predict_orders: lambda < 1");
  RatePrediction r;
  r.lambda = lambda;
  r.p = p;
  r.d = d;
  r.l = l;
  r.gamma_pd = 0.5 * d * (p - 2.0);
  r.zeta_exp = (-2.0 * (p - 1.0) + d * (p - 2.0)) / (2.0 * p);
  const double q = (p * (1.0 - d) + 1.0) / p;
  r.beta = std::min({2.0 * lambda + r.zeta_exp - q,
                     lambda - 1.0 + (1.0 + r.gamma_pd) / p,
                     1.0 + r.zeta_exp + lambda - q});
  r.delta_pi = l + (0.5 * d - d / p - 1.0);
  return r;
}

/// Integral over F_l of |u(x_l) - u(x_r)| between opposite assigned points;
/// vanishes linearly with the gap distance for W^{1,p} solutions.
template <int D>
double interface_value_gap(const MultiPatchDomain<D>& dom, const std::type_identity_t<ScalarField<D>>& u,
                           int quad_n = 5) {
  const auto rule = gauss_rule<D - 1>(quad_n);
  const PatchFace face = MultiPatchDomain<D>::gap_face(PatchSide::left);
  double acc = 0;
  for (const auto& box : detail::face_elements<D>(dom.left.basis(), face)) {
    const double measure = detail::box_measure<D - 1>(box);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vec<D - 1> t = detail::box_point<D - 1>(box, rule.nodes[q]);
      const auto fp = patch_face_point(dom.left, face, t);
      acc += rule.weights[q] * measure * fp.surface_jacobian *
             std::abs(u(fp.x) - u(dom.gap.gap_map(fp.x)));
    }
  }
  return acc;
}

}  // namespace gapdg
