// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

#include "gapdg/common.hpp"
#include "gapdg/geometry.hpp"
#include "gapdg/linalg.hpp"
#include "gapdg/quadrature.hpp"
#include "gapdg/splines.hpp"

namespace gapdg {

/// Global dof layout: left patch block first, then right. No dof is shared
/// across patches; the coupling is purely through the interface terms.
struct DofMap {
  int left_dim = 0;
  int right_dim = 0;

  int offset(PatchSide s) const { return s == PatchSide::left ? 0 : left_dim; }
  int dim(PatchSide s) const { return s == PatchSide::left ? left_dim : right_dim; }
  int total() const { return left_dim + right_dim; }
};

/// Patchwise-constant diffusion coefficients; rho_g is the value attributed
/// to the gap region (defaults to the right-patch value).
struct DiffusionCoefficients {
  double rho_l = 1.0;
  double rho_r = 1.0;
  double rho_g = 1.0;

  static DiffusionCoefficients make(double l, double r) { return {l, r, r}; }

  double rho(PatchSide s) const { return s == PatchSide::left ? rho_l : rho_r; }
  /// {rho} on the face of patch s: average of the patch and gap values.
  double face_average(PatchSide s) const { return 0.5 * (rho(s) + rho_g); }
};

/// Scale multiplying the rho/h penalty terms.
struct PenaltyConfig {
  double mu = 1.0;

  static PenaltyConfig for_degree(int k) { return {2.0 * (k + 1) * (k + 1)}; }
};

struct AssemblyOptions {
  /// Normal-flux consistency terms on boundary and gap faces. Switching
  /// them off leaves only the symmetric diffusion + penalty parts.
  bool include_consistency = true;
};

/// Triplet accumulator finalized into compressed-row storage. Duplicates
/// are summed in insertion order after a stable sort, so repeated runs
/// produce bit-identical matrices.
class SystemMatrix {
 public:
  explicit SystemMatrix(int n) : n_(n) {}

  int dim() const { return n_; }

  void add(int row, int col, double value) {
    if (value != 0.0) trips_.push_back({row, col, value});
  }

  SparseMatrix finalize() const {
    std::vector<Trip> t = trips_;
    std::stable_sort(t.begin(), t.end(), [](const Trip& a, const Trip& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix A;
    A.rows = A.cols = n_;
    A.row_offsets.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < t.size();) {
      std::size_t j = i;
      double sum = 0;
      while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col)
        sum += t[j++].value;
      A.col_indices.push_back(t[i].col);
      A.values.push_back(sum);
      ++A.row_offsets[t[i].row + 1];
      i = j;
    }
    for (int r = 0; r < n_; ++r) A.row_offsets[r + 1] += A.row_offsets[r];
    return A;
  }

 private:
  struct Trip {
    int row, col;
    double value;
  };
  int n_;
  std::vector<Trip> trips_;
};

template <int D>
using ScalarField = std::function<double(const Vec<D>&)>;
template <int D>
using VectorField = std::function<Vec<D>(const Vec<D>&)>;

/// Discrete setting: geometry plus the trial/test spline space per patch.
/// The field space shares the geometry's breakpoints (dyadically refined
/// pattern) at the requested degree.
template <int D>
struct Discretization {
  MultiPatchDomain<D> domain;
  TensorBasis<D> space_l;
  TensorBasis<D> space_r;
  DofMap dofmap;
  double h = 0;  // global parametric mesh size, max over patches
  int degree = 2;
  int quad_n = 4;  // Gauss points per direction

  const TensorBasis<D>& space(PatchSide s) const {
    return s == PatchSide::left ? space_l : space_r;
  }
};

/// Field knot vector matching the geometry's breakpoints and smoothness at
/// the requested degree (multiplicity raised/lowered to preserve the
/// continuity class, clamped to at least C^0).
inline KnotVector field_knots(const KnotVector& geom, int degree) {
  std::vector<std::pair<double, int>> interior;
  const auto& kts = geom.knots();
  const int gk = geom.degree();
  for (std::size_t i = gk + 1; i + gk + 1 < kts.size();) {
    std::size_t j = i;
    while (j + gk + 1 < kts.size() && kts[j] == kts[i]) ++j;
    const int mult = static_cast<int>(j - i);
    const int smooth = gk - mult;
    interior.emplace_back(kts[i], std::clamp(degree - smooth, 1, degree));
    i = j;
  }
  return KnotVector::clamped(degree, interior);
}

template <int D>
Discretization<D> make_discretization(MultiPatchDomain<D> domain, int degree,
                                      int quad_n = 0) {
  Discretization<D> disc{std::move(domain),
                         TensorBasis<D>(uniform_directions<D>(KnotVector::clamped(degree))),
                         TensorBasis<D>(uniform_directions<D>(KnotVector::clamped(degree))),
                         {},
                         0,
                         degree,
                         quad_n > 0 ? quad_n : degree + 2};
  for (const PatchSide s : {PatchSide::left, PatchSide::right}) {
    std::array<KnotVector, D> kvs =
        uniform_directions<D>(KnotVector::clamped(degree));
    for (int d = 0; d < D; ++d)
      kvs[d] = field_knots(disc.domain.patch(s).basis().direction(d), degree);
    (s == PatchSide::left ? disc.space_l : disc.space_r) = TensorBasis<D>(std::move(kvs));
  }
  disc.dofmap = {disc.space_l.dim(), disc.space_r.dim()};
  disc.h = std::max(disc.space_l.mesh_size(), disc.space_r.mesh_size());
  return disc;
}

namespace detail {

/// Iterate the local basis functions of a LocalValues block, giving the
/// flat local index and global index.
template <int D, class F>
void for_each_local(const TensorBasis<D>& space,
                    const typename TensorBasis<D>::LocalValues& lv, F&& f) {
  const int m = space.degree() + 1;
  int total = 1;
  for (int d = 0; d < D; ++d) total *= m;
  std::array<int, D> j{};
  for (int flat = 0; flat < total; ++flat) {
    std::array<int, D> gj;
    for (int d = 0; d < D; ++d) gj[d] = lv.first[d] + j[d];
    f(flat, space.global_index(gj));
    int d = 0;
    while (d < D && ++j[d] == m) j[d++] = 0;
  }
}

/// Tangential element boxes of a face: tensor spans over the non-fixed
/// directions of the field space.
template <int D>
std::vector<ElementBox<D - 1>> face_elements(const TensorBasis<D>& space,
                                             const PatchFace& face) {
  std::array<std::vector<std::pair<double, double>>, D - 1> per_dir;
  int td = 0;
  for (int d = 0; d < D; ++d)
    if (d != face.dir) per_dir[td++] = space.direction(d).spans();
  std::vector<ElementBox<D - 1>> out;
  std::array<std::size_t, D - 1> idx{};
  while (true) {
    ElementBox<D - 1> e;
    for (int d = 0; d < D - 1; ++d) e[d] = per_dir[d][idx[d]];
    out.push_back(e);
    int d = 0;
    while (d < D - 1 && ++idx[d] == per_dir[d].size()) idx[d++] = 0;
    if (d == D - 1) break;
  }
  return out;
}

template <int M>
double box_measure(const ElementBox<M>& box) {
  double m = 1.0;
  for (int d = 0; d < M; ++d) m *= box[d].second - box[d].first;
  return m;
}

template <int M>
Vec<M> box_point(const ElementBox<M>& box, const Vec<M>& ref) {
  Vec<M> x;
  for (int d = 0; d < M; ++d)
    x[d] = box[d].first + (box[d].second - box[d].first) * ref[d];
  return x;
}

}  // namespace detail

/// Patchwise diffusion block: rho * grad u . grad v over one patch.
template <int D>
void assemble_volume_patch(const PatchMap<D>& geom, const TensorBasis<D>& space,
                           double rho, int offset, int quad_n, SystemMatrix& A) {
  const auto rule = gauss_rule<D>(quad_n);
  const int m = space.degree() + 1;
  int nloc = 1;
  for (int d = 0; d < D; ++d) nloc *= m;
  std::vector<Vec<D>> grads(nloc);
  std::vector<int> gidx(nloc);

  for (const auto& box : space.elements()) {
    const double measure = detail::box_measure<D>(box);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vec<D> xhat = detail::box_point<D>(box, rule.nodes[q]);
      const auto lv = space.tensor_eval(xhat, 1);
      const auto jac = geom.jacobian(xhat);
      const Mat<D> inv = jac.J.inverse();
      detail::for_each_local(space, lv, [&](int flat, int global) {
        grads[flat] = inv.apply_transposed(lv.gradients[flat]);
        gidx[flat] = offset + global;
      });
      const double w = rule.weights[q] * measure * jac.det * rho;
      for (int c = 0; c < nloc; ++c)
        for (int a = 0; a < nloc; ++a)
          A.add(gidx[c], gidx[a], w * dot(grads[a], grads[c]));
    }
  }
}

template <int D>
void assemble_volume(const Discretization<D>& disc, const DiffusionCoefficients& coeffs,
                     SystemMatrix& A) {
  for (const PatchSide s : {PatchSide::left, PatchSide::right})
    assemble_volume_patch(disc.domain.patch(s), disc.space(s), coeffs.rho(s),
                          disc.dofmap.offset(s), disc.quad_n, A);
}

/// Weak Dirichlet terms on one boundary face: -rho (grad u . n) v and the
/// mu rho / h penalty; the matching penalty data term goes to the load.
/// There is no adjoint (symmetrizing) term.
template <int D>
void assemble_boundary_face(const PatchMap<D>& geom, const TensorBasis<D>& space,
                            const PatchFace& face, double rho, int offset, double mu,
                            double h, int quad_n, const std::type_identity_t<ScalarField<D>>& u_D,
                            SystemMatrix& A, std::vector<double>& rhs,
                            const AssemblyOptions& options = {}) {
  const auto rule = gauss_rule<D - 1>(quad_n);
  const int m = space.degree() + 1;
  int nloc = 1;
  for (int d = 0; d < D; ++d) nloc *= m;
  std::vector<Vec<D>> grads(nloc);
  std::vector<int> gidx(nloc);

  for (const auto& box : detail::face_elements<D>(space, face)) {
    const double measure = detail::box_measure<D - 1>(box);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vec<D - 1> t = detail::box_point<D - 1>(box, rule.nodes[q]);
      const auto fp = patch_face_point(geom, face, t);
      const auto lv = space.tensor_eval(fp.xhat, 1);
      const Mat<D> inv = geom.jacobian(fp.xhat).J.inverse();
      detail::for_each_local(space, lv, [&](int flat, int global) {
        grads[flat] = inv.apply_transposed(lv.gradients[flat]);
        gidx[flat] = offset + global;
      });
      const double w = rule.weights[q] * measure * fp.surface_jacobian;
      const double pen = mu * rho / h;
      for (int c = 0; c < nloc; ++c) {
        const double vc = lv.values[c];
        for (int a = 0; a < nloc; ++a) {
          double entry = pen * lv.values[a] * vc;
          if (options.include_consistency)
            entry -= rho * dot(grads[a], fp.normal) * vc;
          A.add(gidx[c], gidx[a], w * entry);
        }
        if (u_D) rhs[gidx[c]] += w * pen * u_D(fp.x) * vc;
      }
    }
  }
}

template <int D>
void assemble_boundary(const Discretization<D>& disc, const DiffusionCoefficients& coeffs,
                       const PenaltyConfig& penalty, const std::type_identity_t<ScalarField<D>>& u_D,
                       SystemMatrix& A, std::vector<double>& rhs,
                       const AssemblyOptions& options = {}) {
  for (const auto& bf : disc.domain.boundary) {
    if (!bf.dirichlet) continue;
    assemble_boundary_face(disc.domain.patch(bf.side), disc.space(bf.side), bf.face,
                           coeffs.rho(bf.side), disc.dofmap.offset(bf.side), penalty.mu,
                           disc.h, disc.quad_n, u_D, A, rhs, options);
  }
}

/// Interface flux across the gap. For each quadrature point on a face, the
/// trace from the opposite patch is fetched at the diametrically opposite
/// assigned point (gap_map from F_l, gap_project from F_r):
///   - consistency: -(rho_own/2 grad u_own + rho_opp/2 grad u_opp) . n_own
///   - penalty:     +mu {rho}/h (u_own - u_opp)
/// tested against the own-side trace with the own face's surface measure.
template <int D>
void assemble_gap(const Discretization<D>& disc, const DiffusionCoefficients& coeffs,
                  const PenaltyConfig& penalty, SystemMatrix& A,
                  const AssemblyOptions& options = {}) {
  const auto rule = gauss_rule<D - 1>(disc.quad_n);
  const int m = disc.degree + 1;
  int nloc = 1;
  for (int d = 0; d < D; ++d) nloc *= m;

  for (const PatchSide own : {PatchSide::left, PatchSide::right}) {
    const PatchSide opp = own == PatchSide::left ? PatchSide::right : PatchSide::left;
    const PatchMap<D>& geom_own = disc.domain.patch(own);
    const PatchMap<D>& geom_opp = disc.domain.patch(opp);
    const TensorBasis<D>& space_own = disc.space(own);
    const TensorBasis<D>& space_opp = disc.space(opp);
    const PatchFace face_own = MultiPatchDomain<D>::gap_face(own);
    const PatchFace face_opp = MultiPatchDomain<D>::gap_face(opp);
    const int off_own = disc.dofmap.offset(own);
    const int off_opp = disc.dofmap.offset(opp);
    const double rho_own = coeffs.rho(own);
    const double rho_opp = coeffs.rho(opp);
    const double pen = penalty.mu * coeffs.face_average(own) / disc.h;

    std::vector<Vec<D>> g_own(nloc), g_opp(nloc);
    std::vector<int> i_own(nloc), i_opp(nloc);

    for (const auto& box : detail::face_elements<D>(space_own, face_own)) {
      const double measure = detail::box_measure<D - 1>(box);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Vec<D - 1> t = detail::box_point<D - 1>(box, rule.nodes[q]);
        const auto fp = patch_face_point(geom_own, face_own, t);
        const Vec<D> x_opp = own == PatchSide::left ? disc.domain.gap.gap_map(fp.x)
                                                    : disc.domain.gap.gap_project(fp.x);
        Vec<D - 1> t_opp;
        for (int d = 1; d < D; ++d) t_opp[d - 1] = std::clamp(x_opp[d], 0.0, 1.0);
        const Vec<D> xhat_opp =
            geom_opp.inverse_map(x_opp, face_param_to_xhat<D>(face_opp, t_opp));

        const auto lv_own = space_own.tensor_eval(fp.xhat, 1);
        const auto lv_opp = space_opp.tensor_eval(xhat_opp, 1);
        const Mat<D> inv_own = geom_own.jacobian(fp.xhat).J.inverse();
        const Mat<D> inv_opp = geom_opp.jacobian(xhat_opp).J.inverse();
        detail::for_each_local(space_own, lv_own, [&](int flat, int global) {
          g_own[flat] = inv_own.apply_transposed(lv_own.gradients[flat]);
          i_own[flat] = off_own + global;
        });
        detail::for_each_local(space_opp, lv_opp, [&](int flat, int global) {
          g_opp[flat] = inv_opp.apply_transposed(lv_opp.gradients[flat]);
          i_opp[flat] = off_opp + global;
        });

        const double w = rule.weights[q] * measure * fp.surface_jacobian;
        for (int c = 0; c < nloc; ++c) {
          const double vc = lv_own.values[c];
          for (int a = 0; a < nloc; ++a) {
            double own_entry = pen * lv_own.values[a] * vc;
            double opp_entry = -pen * lv_opp.values[a] * vc;
            if (options.include_consistency) {
              own_entry -= 0.5 * rho_own * dot(g_own[a], fp.normal) * vc;
              opp_entry -= 0.5 * rho_opp * dot(g_opp[a], fp.normal) * vc;
            }
            A.add(i_own[c], i_own[a], w * own_entry);
            A.add(i_own[c], i_opp[a], w * opp_entry);
          }
        }
      }
    }
  }
}

/// Load vector from the source term: per-element quadrature of f v |det|.
template <int D>
void assemble_rhs_patch(const PatchMap<D>& geom, const TensorBasis<D>& space,
                        const std::type_identity_t<ScalarField<D>>& f, int offset, int quad_n,
                        std::vector<double>& rhs) {
  const auto rule = gauss_rule<D>(quad_n);
  for (const auto& box : space.elements()) {
    const double measure = detail::box_measure<D>(box);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vec<D> xhat = detail::box_point<D>(box, rule.nodes[q]);
      const auto lv = space.tensor_eval(xhat, 0);
      const auto jac = geom.jacobian(xhat);
      const double w = rule.weights[q] * measure * jac.det * f(geom.map_point(xhat));
      detail::for_each_local(space, lv, [&](int flat, int global) {
        rhs[offset + global] += w * lv.values[flat];
      });
    }
  }
}

template <int D>
std::vector<double> assemble_rhs(const Discretization<D>& disc, const std::type_identity_t<ScalarField<D>>& f) {
  std::vector<double> rhs(disc.dofmap.total(), 0.0);
  for (const PatchSide s : {PatchSide::left, PatchSide::right})
    assemble_rhs_patch(disc.domain.patch(s), disc.space(s), f, disc.dofmap.offset(s),
                       disc.quad_n, rhs);
  return rhs;
}

template <int D>
struct AssembledSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
};

/// Full dG system: volume diffusion, weak Dirichlet boundary, and gap flux.
template <int D>
AssembledSystem<D> assemble_system(const Discretization<D>& disc,
                                   const DiffusionCoefficients& coeffs,
                                   const PenaltyConfig& penalty, const std::type_identity_t<ScalarField<D>>& f,
                                   const std::type_identity_t<ScalarField<D>>& u_D,
                                   const AssemblyOptions& options = {}) {
  SystemMatrix A(disc.dofmap.total());
  std::vector<double> rhs = assemble_rhs(disc, f);
  assemble_volume(disc, coeffs, A);
  assemble_boundary(disc, coeffs, penalty, u_D, A, rhs, options);
  assemble_gap(disc, coeffs, penalty, A, options);
  return {A.finalize(), std::move(rhs)};
}

/// Value and physical gradient of a discrete field from its patch-local
/// coefficients.
template <int D>
struct FieldValue {
  double value = 0;
  Vec<D> grad{};
};

template <int D>
FieldValue<D> eval_field(const PatchMap<D>& geom, const TensorBasis<D>& space,
                         std::span<const double> coeffs,
                         const std::type_identity_t<Vec<D>>& xhat) {
  const auto lv = space.tensor_eval(xhat, 1);
  const Mat<D> inv = geom.jacobian(xhat).J.inverse();
  FieldValue<D> out;
  Vec<D> pgrad{};
  detail::for_each_local(space, lv, [&](int flat, int global) {
    out.value += coeffs[global] * lv.values[flat];
    pgrad += coeffs[global] * lv.gradients[flat];
  });
  out.grad = inv.apply_transposed(pgrad);
  return out;
}

}  // namespace gapdg
