// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gapdg/common.hpp"
#include "gapdg/splines.hpp"

namespace gapdg {

enum class PatchSide { left, right };

/// Identifies one hyperface of the parametric cube: xhat[dir] = side.
struct PatchFace {
  int dir;
  int side;  // 0 or 1
};

/// B-spline geometry map from [0,1]^D onto one patch.
///
/// Control points are stored lexicographically with direction 1 fastest,
/// matching TensorBasis::global_index. The map must be regular (positive
/// Jacobian determinant) wherever it is queried.
template <int D>
class PatchMap {
 public:
  PatchMap(TensorBasis<D> basis, std::vector<Vec<D>> control_points, PatchSide label)
      : basis_(std::move(basis)), control_points_(std::move(control_points)), label_(label) {
    if (static_cast<int>(control_points_.size()) != basis_.dim())
      throw std::invalid_argument("PatchMap: control point count mismatch");
    build_seed_grid();
  }

  const TensorBasis<D>& basis() const { return basis_; }
  const std::vector<Vec<D>>& control_points() const { return control_points_; }
  PatchSide label() const { return label_; }

  Vec<D> map_point(const Vec<D>& xhat) const {
    const auto lv = basis_.tensor_eval(xhat, 0);
    Vec<D> x{};
    for_each_local(lv.first, [&](int flat, int global) {
      x += lv.values[flat] * control_points_[global];
    });
    return x;
  }

  struct Jacobian {
    Mat<D> J;     // columns are d Phi / d xhat_i
    double det;
  };

  /// Jacobian of the map; throws GeometryError when det <= 0.
  Jacobian jacobian(const Vec<D>& xhat) const {
    const auto lv = basis_.tensor_eval(xhat, 1);
    Jacobian jac{};
    for_each_local(lv.first, [&](int flat, int global) {
      const Vec<D>& c = control_points_[global];
      for (int r = 0; r < D; ++r)
        for (int col = 0; col < D; ++col) jac.J(r, col) += c[r] * lv.gradients[flat][col];
    });
    jac.det = jac.J.det();
    if (!(jac.det > 0))
      throw GeometryError("PatchMap: nonpositive Jacobian determinant");
    return jac;
  }

  /// Newton inversion seeded from the nearest point of a 9^D parametric
  /// sample grid. Iterates are clamped to [0,1]^D.
  Vec<D> inverse_map(const Vec<D>& x) const {
    int best = 0;
    double best_d = dist(seed_points_[0], x);
    for (std::size_t i = 1; i < seed_points_.size(); ++i) {
      const double d = dist(seed_points_[i], x);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return inverse_map(x, seed_params_[best]);
  }

  Vec<D> inverse_map(const Vec<D>& x, const Vec<D>& seed) const {
    Vec<D> xhat = clamp01(seed);
    for (int it = 0; it < 50; ++it) {
      const Vec<D> r = map_point(xhat) - x;
      if (norm(r) <= 1e-10) return xhat;
      const auto jac = jacobian(xhat);
      const Vec<D> step = jac.J.inverse().apply(r);
      Vec<D> next = clamp01(xhat - step);
      if (dist(next, xhat) <= 1e-14) {
        // pinned at the box boundary; accept only if essentially converged
        if (norm(map_point(next) - x) <= 1e-8) return next;
        break;
      }
      xhat = next;
    }
    throw InversionError("PatchMap: Newton inversion did not converge");
  }

 private:
  template <class F>
  void for_each_local(const std::array<int, D>& first, F&& f) const {
    const int m = basis_.degree() + 1;
    int total = 1;
    for (int d = 0; d < D; ++d) total *= m;
    std::array<int, D> j{};
    for (int flat = 0; flat < total; ++flat) {
      std::array<int, D> gj;
      for (int d = 0; d < D; ++d) gj[d] = first[d] + j[d];
      f(flat, basis_.global_index(gj));
      int d = 0;
      while (d < D && ++j[d] == m) j[d++] = 0;
    }
  }

  static Vec<D> clamp01(Vec<D> v) {
    for (int d = 0; d < D; ++d) v[d] = std::min(1.0, std::max(0.0, v[d]));
    return v;
  }

  void build_seed_grid() {
    std::array<int, D> j{};
    while (true) {
      Vec<D> p;
      for (int d = 0; d < D; ++d) p[d] = j[d] / 8.0;
      seed_params_.push_back(p);
      seed_points_.push_back(map_point(p));
      int d = 0;
      while (d < D && ++j[d] == 9) j[d++] = 0;
      if (d == D) break;
    }
  }

  TensorBasis<D> basis_;
  std::vector<Vec<D>> control_points_;
  PatchSide label_;
  std::vector<Vec<D>> seed_params_, seed_points_;
};

/// Physical point on a patch face with its outward unit normal and the
/// surface Jacobian of the face parametrization.
template <int D>
struct FacePoint {
  Vec<D> x;
  Vec<D> xhat;
  Vec<D> normal;
  double surface_jacobian;
};

/// Embed a face parameter into the full parametric cube.
template <int D>
Vec<D> face_param_to_xhat(const PatchFace& face, const Vec<D - 1>& t) {
  Vec<D> xhat;
  int td = 0;
  for (int d = 0; d < D; ++d)
    xhat[d] = (d == face.dir) ? static_cast<double>(face.side) : t[td++];
  return xhat;
}

/// Face point, outward normal (Nanson's formula) and surface measure factor.
template <int D>
FacePoint<D> patch_face_point(const PatchMap<D>& patch, const PatchFace& face,
                              const Vec<D - 1>& t) {
  FacePoint<D> fp;
  fp.xhat = face_param_to_xhat<D>(face, t);
  fp.x = patch.map_point(fp.xhat);
  const auto jac = patch.jacobian(fp.xhat);
  const Mat<D> inv = jac.J.inverse();
  Vec<D> e{};
  e[face.dir] = (face.side == 1) ? 1.0 : -1.0;
  Vec<D> n = inv.apply_transposed(e);  // grad of xhat_dir, outward oriented
  const double len = norm(n);
  fp.surface_jacobian = jac.det * len;
  fp.normal = (1.0 / len) * n;
  return fp;
}

/// Built-in gap profiles, normalized so max |zeta| = 1.
enum class GapProfile { parabola, bump };

inline const char* profile_name(GapProfile p) {
  return p == GapProfile::parabola ? "parabola" : "bump";
}

inline GapProfile profile_from_name(const std::string& name) {
  if (name == "parabola") return GapProfile::parabola;
  if (name == "bump") return GapProfile::bump;
  throw std::invalid_argument("unknown gap profile: " + name);
}

/// The gap between the two patch interfaces.
///
/// The nominal interface is the plane x_1 = 0. The left face F_l sits at
/// offset -split * d_g * zeta from it and the right face F_r at
/// +(1-split) * d_g * zeta, so diametrically opposite points are always
/// d_g * zeta apart along the nominal normal.
template <int D>
struct GapInterface {
  double d_g = 0.0;
  double lambda = 1.0;  // gap-size exponent used to build d_g; kept for reports
  double split = 0.0;   // fraction of the gap carved from the left patch
  GapProfile profile = D == 2 ? GapProfile::parabola : GapProfile::bump;
  Vec<D> normal_l = unit_x1();  // nominal unit normal on F_l toward the gap

  static Vec<D> unit_x1() {
    Vec<D> e{};
    e[0] = 1.0;
    return e;
  }

  /// Profile value from the tangential coordinates of a face point.
  double profile_value(const Vec<D>& x) const {
    if constexpr (D == 2) {
      return 4.0 * x[1] * (1.0 - x[1]);
    } else {
      if (profile == GapProfile::parabola) return 4.0 * x[1] * (1.0 - x[1]);
      return 16.0 * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]);
    }
  }

  /// max over multi-index derivatives up to order 1 of sup |D^a zeta|.
  double profile_w1inf() const {
    return 4.0;  // both built-in profiles: sup |zeta| = 1, sup |zeta'| = 4
  }

  /// Opposite-point assignment from F_l to F_r along the nominal normal.
  Vec<D> gap_map(const Vec<D>& x_l) const {
    return x_l + (d_g * profile_value(x_l)) * normal_l;
  }

  /// Inverse assignment: drops the normal-direction displacement.
  Vec<D> gap_project(const Vec<D>& x_r) const {
    Vec<D> x_l = x_r;
    x_l[0] = -split * d_g * profile_value(x_r);
    return x_l;
  }

  /// Point of F_l at tangential coordinates t.
  Vec<D> left_face_point(const Vec<D - 1>& t) const {
    Vec<D> x;
    x[0] = 0.0;
    for (int d = 1; d < D; ++d) x[d] = t[d - 1];
    x[0] = -split * d_g * profile_value(x);
    return x;
  }
};

/// Max distance between opposite assigned points, from a dense face sample.
template <int D>
double gap_distance(const GapInterface<D>& gap, int samples_per_dir = 101) {
  double dmax = 0.0;
  std::array<int, D - 1> j{};
  while (true) {
    Vec<D - 1> t;
    for (int d = 0; d < D - 1; ++d) t[d] = static_cast<double>(j[d]) / (samples_per_dir - 1);
    const Vec<D> x_l = gap.left_face_point(t);
    dmax = std::max(dmax, dist(gap.gap_map(x_l), x_l));
    int d = 0;
    while (d < D - 1 && ++j[d] == samples_per_dir) j[d++] = 0;
    if (d == D - 1) break;
  }
  return dmax;
}

/// Two-patch domain with a gap between the facing interfaces.
template <int D>
struct MultiPatchDomain {
  PatchMap<D> left;
  PatchMap<D> right;
  GapInterface<D> gap;

  struct BoundaryFace {
    PatchSide side;
    PatchFace face;
    bool dirichlet = true;
  };
  std::vector<BoundaryFace> boundary;

  const PatchMap<D>& patch(PatchSide s) const { return s == PatchSide::left ? left : right; }

  /// The face of a patch that borders the gap.
  static PatchFace gap_face(PatchSide s) {
    return s == PatchSide::left ? PatchFace{0, 1} : PatchFace{0, 0};
  }
};

/// All outer faces of the two patches (everything except the gap faces),
/// marked Dirichlet.
template <int D>
std::vector<typename MultiPatchDomain<D>::BoundaryFace> default_boundary_faces() {
  std::vector<typename MultiPatchDomain<D>::BoundaryFace> out;
  out.push_back({PatchSide::left, {0, 0}, true});
  out.push_back({PatchSide::right, {0, 1}, true});
  for (int dir = 1; dir < D; ++dir)
    for (int side : {0, 1}) {
      out.push_back({PatchSide::left, {dir, side}, true});
      out.push_back({PatchSide::right, {dir, side}, true});
    }
  return out;
}

/// Geometry of a gap face: point, unit normal toward the gap, surface
/// Jacobian. Evaluated from the patch map, whose interface layer carries the
/// gap profile exactly.
template <int D>
FacePoint<D> face_geometry(const MultiPatchDomain<D>& dom, PatchSide side,
                           const Vec<D - 1>& t) {
  return patch_face_point(dom.patch(side), MultiPatchDomain<D>::gap_face(side), t);
}

/// Sampling check that no interior point of one patch lies inside the other.
template <int D>
bool patches_overlap(const MultiPatchDomain<D>& dom, int samples_per_dir = 11,
                     double tol = 1e-10) {
  auto inside = [&](const PatchMap<D>& p, const Vec<D>& x) {
    Vec<D> xhat;
    try {
      xhat = p.inverse_map(x);
    } catch (const InversionError&) {
      return false;
    }
    if (norm(p.map_point(xhat) - x) > tol) return false;
    for (int d = 0; d < D; ++d)
      if (xhat[d] < 1e-8 || xhat[d] > 1.0 - 1e-8) return false;
    return true;
  };
  std::array<int, D> j{};
  while (true) {
    Vec<D> t;
    for (int d = 0; d < D; ++d) t[d] = (j[d] + 0.5) / samples_per_dir;
    if (inside(dom.right, dom.left.map_point(t))) return true;
    if (inside(dom.left, dom.right.map_point(t))) return true;
    int d = 0;
    while (d < D && ++j[d] == samples_per_dir) j[d++] = 0;
    if (d == D) break;
  }
  return false;
}

}  // namespace gapdg
