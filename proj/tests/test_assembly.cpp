// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gapdg/analysis.hpp"
#include "gapdg/assembly.hpp"
#include "gapdg/cases.hpp"
#include "support.hpp"

using namespace gapdg;
using Catch::Approx;

namespace {

std::vector<double> ones(int n) { return std::vector<double>(n, 1.0); }

double bilinear(const SparseMatrix& A, const std::vector<double>& u,
                const std::vector<double>& v) {
  const auto Au = matvec(A, u);
  double s = 0;
  for (std::size_t i = 0; i < Au.size(); ++i) s += v[i] * Au[i];
  return s;
}

// independent boundary-length oracle: polyline sampling of a face curve
double face_length_polyline(const PatchMap<2>& p, const PatchFace& face, int n = 200000) {
  double len = 0;
  Vec<2> prev = p.map_point(face_param_to_xhat<2>(face, {0.0}));
  for (int i = 1; i <= n; ++i) {
    const Vec<2> cur =
        p.map_point(face_param_to_xhat<2>(face, {static_cast<double>(i) / n}));
    len += dist(cur, prev);
    prev = cur;
  }
  return len;
}

double boundary_identity_oracle(const MultiPatchDomain<2>& dom,
                                const DiffusionCoefficients& coeffs, double mu, double h) {
  double acc = 0;
  for (const auto& bf : dom.boundary)
    acc += mu * coeffs.rho(bf.side) / h * face_length_polyline(dom.patch(bf.side), bf.face);
  return acc;
}

Discretization<2> ex1_disc(int level, double lambda, double* dg_out = nullptr) {
  auto built = build_case<2>("ex1", level, GapSpec{lambda, false, 0.0});
  if (dg_out) *dg_out = built.d_g;
  return make_discretization<2>(std::move(built.domain), 2);
}

}  // namespace

TEST_CASE("volume block: constants, energy of x1, linearity in rho") {
  const auto patch = testing::identity_patch<2>(1);
  const TensorBasis<2>& space = patch.basis();
  const int n = space.dim();

  SystemMatrix Ab(n);
  assemble_volume_patch(patch, space, 1.0, 0, 4, Ab);
  const SparseMatrix A = Ab.finalize();

  const auto r = matvec(A, ones(n));
  for (double v : r) REQUIRE(std::abs(v) <= 1e-10);

  // coefficients of the linear x1 are the Greville abscissae
  std::vector<double> x1(n);
  const auto g = space.direction(0).greville();
  const auto dims = space.dims();
  for (int j2 = 0; j2 < dims[1]; ++j2)
    for (int j1 = 0; j1 < dims[0]; ++j1) x1[space.global_index({j1, j2})] = g[j1];
  REQUIRE(bilinear(A, x1, x1) == Approx(1.0).margin(1e-10));

  SystemMatrix A2b(n);
  assemble_volume_patch(patch, space, 2.0, 0, 4, A2b);
  const SparseMatrix A2 = A2b.finalize();
  REQUIRE(A2.values.size() == A.values.size());
  for (std::size_t i = 0; i < A.values.size(); ++i)
    REQUIRE(A2.values[i] == 2.0 * A.values[i]);
}

TEST_CASE("boundary block: zero data, constants identity, 1/h scaling") {
  const auto disc = ex1_disc(1, 1.0);
  const auto& coeffs = DiffusionCoefficients::make(1.0, 1.0);
  const PenaltyConfig pen{18.0};
  const int n = disc.dofmap.total();

  {  // zero Dirichlet data contributes nothing to the load
    SystemMatrix A(n);
    std::vector<double> rhs(n, 0.0);
    assemble_boundary(disc, coeffs, pen, [](const Vec<2>&) { return 0.0; }, A, rhs);
    for (double v : rhs) REQUIRE(v == 0.0);
  }

  {  // constants see only the penalty: 1^T A 1 = mu sum rho |bndry| / h
    SystemMatrix A(n);
    std::vector<double> rhs(n, 0.0);
    assemble_boundary(disc, coeffs, pen, {}, A, rhs);
    const double oracle = boundary_identity_oracle(disc.domain, coeffs, pen.mu, disc.h);
    REQUIRE(bilinear(A.finalize(), ones(n), ones(n)) == Approx(oracle).epsilon(1e-8));
  }

  {  // halving h doubles the penalty part (consistency off isolates it)
    const auto patch = testing::identity_patch<2>();
    const PatchFace face{0, 0};
    AssemblyOptions no_cons{false};
    SystemMatrix A1(patch.basis().dim()), A2(patch.basis().dim());
    std::vector<double> r1(patch.basis().dim(), 0.0), r2 = r1;
    auto uD = [](const Vec<2>& x) { return x[1]; };
    assemble_boundary_face(patch, patch.basis(), face, 1.0, 0, 18.0, 0.25, 4, uD, A1, r1,
                           no_cons);
    assemble_boundary_face(patch, patch.basis(), face, 1.0, 0, 18.0, 0.125, 4, uD, A2, r2,
                           no_cons);
    const SparseMatrix S1 = A1.finalize(), S2 = A2.finalize();
    for (std::size_t i = 0; i < S1.values.size(); ++i)
      REQUIRE(S2.values[i] == Approx(2.0 * S1.values[i]).epsilon(1e-15));
    for (std::size_t i = 0; i < r1.size(); ++i)
      REQUIRE(r2[i] == Approx(2.0 * r1[i]).margin(1e-15));
  }
}

TEST_CASE("gap block vanishes on global constants") {
  for (double lambda : {1.0, 2.0}) {
    const auto disc = ex1_disc(2, lambda);
    SystemMatrix A(disc.dofmap.total());
    assemble_gap(disc, DiffusionCoefficients::make(1.0, 1.0), PenaltyConfig{18.0}, A);
    const auto r = matvec(A.finalize(), ones(disc.dofmap.total()));
    for (double v : r) REQUIRE(std::abs(v) <= 1e-10);
  }
}

TEST_CASE("zero gap reduces to the matching-interface interior-penalty scheme") {
  auto built = build_case<2>("ex1", 1, GapSpec{1.0, true, 0.0});  // d_g = 0
  const auto disc = make_discretization<2>(std::move(built.domain), 2);
  const auto& coeffs = built.problem.coeffs;
  const PenaltyConfig pen = PenaltyConfig::for_degree(2);
  const int n = disc.dofmap.total();

  const auto sys =
      assemble_system(disc, coeffs, pen, built.problem.source, built.problem.dirichlet);

  SystemMatrix Ao(n);
  std::vector<double> rhs_o = assemble_rhs(disc, built.problem.source);
  assemble_volume(disc, coeffs, Ao);
  assemble_boundary(disc, coeffs, pen, built.problem.dirichlet, Ao, rhs_o);
  testing::assemble_matching_interface_oracle(disc, coeffs, pen.mu, Ao);

  const auto u1 = solve(sys.matrix, sys.rhs);
  const auto u2 = solve(Ao.finalize(), rhs_o);
  REQUIRE(testing::max_abs_diff(u1, u2) <= 1e-10);
}

TEST_CASE("patch test: linear solution reproduced at zero gap") {
  auto built = build_case<2>("ex1", 1, GapSpec{1.0, true, 0.0});
  const auto disc = make_discretization<2>(std::move(built.domain), 2);
  const ProblemCase<2> lin = case_by_id<2>("linear");

  const auto sys = assemble_system(disc, lin.coeffs, PenaltyConfig::for_degree(2),
                                   lin.source, lin.dirichlet);
  const auto u_h = solve(sys.matrix, sys.rhs, SolveMethod::direct_lu, 1e-12);
  const auto eb = dg_error<2>(disc, u_h, lin.exact, lin.exact_grad, lin.coeffs);
  REQUIRE(eb.dg_total <= 1e-8);
}

TEST_CASE("load vector: zero source, unit source on the identity patch") {
  const auto patch = testing::identity_patch<2>(1);
  std::vector<double> rhs(patch.basis().dim(), 0.0);
  assemble_rhs_patch(patch, patch.basis(), [](const Vec<2>&) { return 0.0; }, 0, 4, rhs);
  for (double v : rhs) REQUIRE(v == 0.0);

  std::fill(rhs.begin(), rhs.end(), 0.0);
  assemble_rhs_patch(patch, patch.basis(), [](const Vec<2>&) { return 1.0; }, 0, 4, rhs);
  double sum = 0;
  for (double v : rhs) sum += v;
  REQUIRE(sum == Approx(1.0).margin(1e-10));
}

TEST_CASE("full system: dimension, constants identity, ellipticity sample") {
  double dg = 0;
  const auto disc = ex1_disc(1, 1.0, &dg);
  const auto coeffs = DiffusionCoefficients::make(1.0, 1.0);
  const PenaltyConfig pen = PenaltyConfig::for_degree(2);

  const auto sys = assemble_system(disc, coeffs, pen, [](const Vec<2>&) { return 1.0; },
                                   [](const Vec<2>&) { return 0.0; });
  REQUIRE(sys.matrix.rows == disc.dofmap.total());
  REQUIRE(sys.matrix.rows == disc.space_l.dim() + disc.space_r.dim());

  const double oracle = boundary_identity_oracle(disc.domain, coeffs, pen.mu, disc.h);
  REQUIRE(bilinear(sys.matrix, ones(sys.matrix.rows), ones(sys.matrix.rows)) ==
          Approx(oracle).epsilon(1e-8));

  std::mt19937 rng(41);
  std::uniform_real_distribution<double> unif(-1, 1);
  const double h = disc.h;
  for (double gap_dg : {0.0, h, h * h}) {
    auto built = build_case<2>("ex1", 1, GapSpec{1.0, true, gap_dg});
    const auto d2 = make_discretization<2>(std::move(built.domain), 2);
    SystemMatrix A(d2.dofmap.total());
    std::vector<double> dummy(d2.dofmap.total(), 0.0);
    assemble_volume(d2, coeffs, A);
    assemble_boundary(d2, coeffs, pen, {}, A, dummy);
    assemble_gap(d2, coeffs, pen, A);
    const SparseMatrix S = A.finalize();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> v(S.rows);
      for (auto& c : v) c = unif(rng);
      REQUIRE(bilinear(S, v, v) > 0.0);
    }
  }
}

TEST_CASE("non-symmetry comes only from the consistency terms") {
  // matching interfaces and equal coefficients: the penalty + diffusion core
  // is symmetric, so any asymmetry must enter through the consistency terms
  auto built = build_case<2>("ex1", 1, GapSpec{1.0, true, 0.0});
  const auto disc = make_discretization<2>(std::move(built.domain), 2);
  const auto coeffs = DiffusionCoefficients::make(1.0, 1.0);

  auto asymmetry = [&](const AssemblyOptions& options) {
    SystemMatrix A(disc.dofmap.total());
    std::vector<double> dummy(disc.dofmap.total(), 0.0);
    assemble_volume(disc, coeffs, A);
    assemble_boundary(disc, coeffs, PenaltyConfig{18.0}, {}, A, dummy, options);
    assemble_gap(disc, coeffs, PenaltyConfig{18.0}, A, options);
    const SparseMatrix S = A.finalize();
    const int n = S.rows;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int r = 0; r < n; ++r)
      for (int k = S.row_offsets[r]; k < S.row_offsets[r + 1]; ++k)
        dense[r][S.col_indices[k]] = S.values[k];
    double asym = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        asym = std::max(asym, std::abs(dense[i][j] - dense[j][i]));
    return asym;
  };

  REQUIRE(asymmetry(AssemblyOptions{false}) <= 1e-12);
  REQUIRE(asymmetry(AssemblyOptions{true}) > 1e-6);
}

TEST_CASE("zero-jump kernel: constants feel only the boundary penalty") {
  double dg = 0;
  const auto disc = ex1_disc(2, 1.0, &dg);
  const auto coeffs = DiffusionCoefficients::make(3.0, 1.0);
  const PenaltyConfig pen{18.0};
  const int n = disc.dofmap.total();

  SystemMatrix interior(n);
  assemble_volume(disc, coeffs, interior);
  assemble_gap(disc, coeffs, pen, interior);
  const auto r_int = matvec(interior.finalize(), ones(n));
  for (double v : r_int) REQUIRE(std::abs(v) <= 1e-10);

  SystemMatrix bdry(n);
  std::vector<double> dummy(n, 0.0);
  assemble_boundary(disc, coeffs, pen, {}, bdry, dummy);
  const auto sys = assemble_system(disc, coeffs, pen, [](const Vec<2>&) { return 0.0; },
                                   [](const Vec<2>&) { return 0.0; });
  const auto full = matvec(sys.matrix, ones(n));
  const auto only_bdry = matvec(bdry.finalize(), ones(n));
  REQUIRE(testing::max_abs_diff(full, only_bdry) <= 1e-10);
}

TEST_CASE("orthogonality defect of the injected exact solution decays") {
  const ProblemCase<2> pc = case_by_id<2>("ex1");
  std::vector<double> defects;
  for (int level : {1, 2, 3}) {
    auto built = build_case<2>("ex1", level, GapSpec{2.0, false, 0.0});
    const auto disc = make_discretization<2>(std::move(built.domain), 2);
    const auto sys = assemble_system(disc, pc.coeffs, PenaltyConfig::for_degree(2),
                                     pc.source, pc.dirichlet);
    const auto Pu = testing::greville_interpolant<2>(disc, pc.exact);
    const auto APu = matvec(sys.matrix, Pu);
    double rn = 0, fn = 0;
    for (std::size_t i = 0; i < APu.size(); ++i) {
      rn += (sys.rhs[i] - APu[i]) * (sys.rhs[i] - APu[i]);
      fn += sys.rhs[i] * sys.rhs[i];
    }
    defects.push_back(std::sqrt(rn / fn));
  }
  REQUIRE(defects[1] < defects[0]);
  REQUIRE(defects[2] < defects[1]);
}
