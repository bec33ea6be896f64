// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gapdg/cases.hpp"
#include "gapdg/geometry.hpp"

using namespace gapdg;
using Catch::Approx;

namespace {

// second-order central five/seven-point Laplacian of the exact branch
template <int D>
double fd_neg_div_rho_grad(const ProblemCase<D>& pc, const Vec<D>& x, double rho,
                           double step = 1e-4) {
  double lap = 0;
  for (int d = 0; d < D; ++d) {
    Vec<D> lo = x, hi = x;
    lo[d] -= step;
    hi[d] += step;
    lap += (pc.exact(hi) - 2.0 * pc.exact(x) + pc.exact(lo)) / (step * step);
  }
  return -rho * lap;
}

}  // namespace

TEST_CASE("case registry: ids, dimensions, parameters") {
  REQUIRE(case_dimension("ex1") == 2);
  REQUIRE(case_dimension("ex4") == 3);
  REQUIRE_THROWS_AS(case_dimension("ex9"), std::invalid_argument);
  REQUIRE_THROWS_AS(case_by_id<3>("ex1"), std::invalid_argument);
  REQUIRE_THROWS_AS(build_case<2>("nope", 1, GapSpec{}), std::invalid_argument);

  REQUIRE(case_by_id<2>("ex2").coeffs.rho_l == Approx(4 * M_PI));
  REQUIRE(case_by_id<2>("ex2").coeffs.rho_r == 1.0);
  REQUIRE(case_by_id<3>("ex5").coeffs.rho_l == 4.0);

  // regularity exponents driving the rate predictions
  REQUIRE(case_by_id<2>("ex3", 0.42).sobolev_p == Approx(1.26));
  REQUIRE(case_by_id<2>("ex3", 0.38).sobolev_p == Approx(1.23));
  REQUIRE(case_by_id<2>("ex3", 1.5).sobolev_l == Approx(2.5));
  REQUIRE(case_by_id<2>("ex3", 2.0).sobolev_l == Approx(3.0));
}

TEST_CASE("exact values at reference points") {
  const auto ex1 = case_by_id<2>("ex1");
  REQUIRE(ex1.exact({0.5, 0.5}) == Approx(0.0).margin(1e-12));  // sin(2.5 pi) sin(2 pi)

  const auto ex2 = case_by_id<2>("ex2");
  REQUIRE(ex2.exact({-1e-14, 0.3}) == Approx(0.0).margin(1e-10));
  REQUIRE(ex2.exact({0.0, 0.3}) == Approx(0.0).margin(1e-12));
  // flux continuity: rho_1 u'_1 = 4 pi e^0, rho_2 u'_2 = 4 pi cos(0)
  REQUIRE(ex2.coeffs.rho_l * ex2.exact_grad({-1e-15, 0.5})[0] == Approx(4 * M_PI));
  REQUIRE(ex2.coeffs.rho_r * ex2.exact_grad({0.0, 0.5})[0] == Approx(4 * M_PI));

  const auto ex3 = case_by_id<2>("ex3", 2.0);
  REQUIRE(ex3.exact({0.3, 0.9}) == Approx(0.3 * 0.3 + 0.4 * 0.4));
  REQUIRE(ex3.source({0.3, 0.9}) == Approx(-4.0));

  REQUIRE(exact_eval(ex3, {0.3, 0.9}, ExactQuantity::value) == ex3.exact({0.3, 0.9}));
  REQUIRE(exact_eval(ex3, {0.3, 0.9}, ExactQuantity::source) == ex3.source({0.3, 0.9}));
}

TEST_CASE("source matches the finite-difference operator on every case") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> unif(0.05, 0.95);

  auto check2 = [&](const ProblemCase<2>& pc) {
    for (int i = 0; i < 100; ++i) {
      // stay on one branch and away from the ex3 singular point
      Vec<2> x{unif(rng) * 0.8 + 0.1, unif(rng)};
      if (i % 2) x[0] = -x[0];
      if (pc.id == "ex3" && dist(x, Vec<2>{0.0, 0.5}) < 0.15) continue;
      const double rho = x[0] < 0 ? pc.coeffs.rho_l : pc.coeffs.rho_r;
      const double fd = fd_neg_div_rho_grad(pc, x, rho);
      REQUIRE(pc.source(x) == Approx(fd).epsilon(1e-5).margin(1e-5));
    }
  };
  check2(case_by_id<2>("ex1"));
  check2(case_by_id<2>("ex2"));
  for (double g : {0.38, 0.42, 1.0, 1.5, 2.0}) check2(case_by_id<2>("ex3", g));

  auto check3 = [&](const ProblemCase<3>& pc) {
    for (int i = 0; i < 100; ++i) {
      Vec<3> x{unif(rng) * 0.8 + 0.1, unif(rng), unif(rng)};
      if (i % 2) x[0] = -x[0];
      const double rho = x[0] < 0 ? pc.coeffs.rho_l : pc.coeffs.rho_r;
      const double fd = fd_neg_div_rho_grad(pc, x, rho);
      REQUIRE(pc.source(x) == Approx(fd).epsilon(1e-5).margin(1e-5));
    }
  };
  check3(case_by_id<3>("ex4"));
  check3(case_by_id<3>("ex5"));
}

TEST_CASE("gradients match finite differences of the exact value") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const double step = 1e-6;
  for (double g : {0.38, 1.0, 2.0}) {
    const auto pc = case_by_id<2>("ex3", g);
    for (int i = 0; i < 50; ++i) {
      const Vec<2> x{unif(rng), unif(rng)};
      if (dist(x, Vec<2>{0.0, 0.5}) < 0.15) continue;
      const auto grad = pc.exact_grad(x);
      for (int d = 0; d < 2; ++d) {
        Vec<2> lo = x, hi = x;
        lo[d] -= step;
        hi[d] += step;
        REQUIRE(grad[d] ==
                Approx((pc.exact(hi) - pc.exact(lo)) / (2 * step)).epsilon(1e-5).margin(1e-6));
      }
    }
  }
}

TEST_CASE("interface compatibility for the discontinuous-coefficient cases") {
  auto check_jump2 = [](const ProblemCase<2>& pc) {
    for (int i = 0; i <= 20; ++i) {
      const double y = i / 20.0;
      const Vec<2> left{-1e-13, y}, right{1e-13, y};
      REQUIRE(std::abs(pc.exact(left) - pc.exact(right)) <= 1e-10);
      const double flux_l = pc.coeffs.rho_l * pc.exact_grad(left)[0];
      const double flux_r = pc.coeffs.rho_r * pc.exact_grad(right)[0];
      REQUIRE(std::abs(flux_l - flux_r) <= 1e-9);
    }
  };
  check_jump2(case_by_id<2>("ex2"));
  check_jump2(case_by_id<2>("ex1"));  // trivially smooth

  auto check_jump3 = [](const ProblemCase<3>& pc) {
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) {
        const Vec<3> left{-1e-13, i / 10.0, j / 10.0}, right{1e-13, i / 10.0, j / 10.0};
        REQUIRE(std::abs(pc.exact(left) - pc.exact(right)) <= 1e-10);
        REQUIRE(std::abs(pc.coeffs.rho_l * pc.exact_grad(left)[0] -
                         pc.coeffs.rho_r * pc.exact_grad(right)[0]) <= 1e-9);
      }
  };
  check_jump3(case_by_id<3>("ex4"));
  check_jump3(case_by_id<3>("ex5"));
}

TEST_CASE("gap geometry tracks d_g = h^lambda across levels") {
  for (double lambda : {1.0, 2.0, 3.0}) {
    for (int level : {1, 2, 3}) {
      const auto built = build_case<2>("ex1", level, GapSpec{lambda, false, 0.0});
      REQUIRE(built.h == Approx(0.5 / (1 << level)));
      REQUIRE(built.d_g == Approx(std::pow(built.h, lambda)));
      REQUIRE(gap_distance(built.domain.gap) == Approx(std::pow(built.h, lambda)).margin(1e-8));
      REQUIRE(built.domain.left.basis().mesh_size() == Approx(built.h));
    }
  }
}

TEST_CASE("3D prolongation replicates the 2D net through x3") {
  const auto b3 = build_case<3>("ex4", 0, GapSpec{1.0, true, 0.0});
  const auto b2 = build_case<2>("ex2", 0, GapSpec{1.0, true, 0.0});
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 30; ++i) {
    const double u = unif(rng), v = unif(rng), w = unif(rng);
    const Vec<3> x3 = b3.domain.left.map_point({u, v, w});
    const Vec<2> x2 = b2.domain.left.map_point({u, v});
    REQUIRE(x3[0] == Approx(x2[0]).margin(1e-13));
    REQUIRE(x3[1] == Approx(x2[1]).margin(1e-13));
    REQUIRE(x3[2] == Approx(w).margin(1e-13));  // straight prolongation
  }
}

TEST_CASE("the ex5 gap straddles the nominal interface symmetrically") {
  const auto built = build_case<3>("ex5", 1, GapSpec{1.0, false, 0.0});
  REQUIRE(built.domain.gap.split == 0.5);
  const Vec<2> mid{0.5, 0.5};
  const auto fl = face_geometry(built.domain, PatchSide::left, mid);
  const auto fr = face_geometry(built.domain, PatchSide::right, mid);
  REQUIRE(fl.x[0] == Approx(-0.5 * built.d_g));  // zeta = 1 at the face center
  REQUIRE(fr.x[0] == Approx(0.5 * built.d_g));
  REQUIRE(gap_distance(built.domain.gap) == Approx(built.d_g).margin(1e-8));
  REQUIRE_FALSE(patches_overlap(built.domain, 7));
}
