#include <cmath>

#include "bura/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bura;
using testing::approx;
using testing::rel_dev;

TEST_CASE("diagonal 1-BURA errors match the published grid") {
  struct Row {
    double alpha;
    int k;
    double E;
  };
  const Row rows[] = {
      {0.75, 5, 2.7348e-3}, {0.50, 5, 2.6896e-4}, {0.25, 5, 2.8676e-5},
      {0.75, 6, 1.4312e-3}, {0.50, 6, 1.0747e-4}, {0.25, 6, 9.2522e-6},
      {0.50, 7, 4.6037e-5}, {0.25, 7, 3.2566e-6},
  };
  for (const auto& row : rows) {
    CAPTURE(row.alpha);
    CAPTURE(row.k);
    const auto& r = approx(row.alpha, 1, row.k, row.k);
    CHECK(rel_dev(r.error.to_double(), row.E) < 1e-3);
  }
}

TEST_CASE("mixed-degree errors for beta 2 and 3") {
  CHECK(rel_dev(approx(0.5, 2, 5, 4).error.to_double(), 2.0349e-6) < 1e-3);
  CHECK(rel_dev(approx(0.25, 3, 5, 3).error.to_double(), 1.8958e-7) < 1e-3);
  CHECK(rel_dev(approx(0.1, 2, 7, 6).error.to_double(), 4.2824e-9) < 1e-3);
}

TEST_CASE("structural invariants of a converged approximant") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto& r = approx(alpha, 1, 5, 5);
    CAPTURE(alpha);
    CHECK(check_approximant(r, 1e-3) == "");
    REQUIRE(r.extreme_points.size() == 12u);
    CHECK(r.extreme_points.front().is_zero());
    CHECK(r.extreme_points.back().to_double() == 1.0);

    // Equioscillation: the residual alternates and has magnitude E at every point.
    const double E = r.error.to_double();
    int prev_sign = 0;
    for (const auto& t : r.extreme_points) {
      const XScalar e = r.residual(t);
      CHECK(std::abs(std::abs(e.to_double()) - E) < 1e-6 * E);
      CHECK(e.sign() != prev_sign);
      prev_sign = e.sign();
    }
    // At t = 0 the target vanishes, so r(0) = E in magnitude; at t = 1, r(1) = 1 -+ E.
    CHECK(std::abs(std::abs(r.eval(0.0)) - E) < 1e-6 * E);
    CHECK(std::abs(std::abs(r.eval(1.0) - 1.0) - E) < 1e-6 * E);
  }
}

TEST_CASE("no grid point exceeds the equioscillation level") {
  const auto& r = approx(0.5, 1, 5, 5);
  const double E = r.error.to_double();
  const Precision p{r.precision_bits};
  double worst = 0.0;
  // Geometric plus uniform grid, so the clustered extrema near zero are sampled.
  for (int i = 0; i <= 400; ++i) {
    const XScalar t1(std::pow(10.0, -14.0 * (1.0 - i / 400.0)), p);
    const XScalar t2(i / 400.0, p);
    worst = std::max({worst, abs(r.residual(t1)).to_double(), abs(r.residual(t2)).to_double()});
  }
  CHECK(worst <= E * (1.0 + 1e-6));
  CHECK(worst >= 0.5 * E);
}

TEST_CASE("error decreases in k and tracks the asymptotic model") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    double prev = 1.0;
    for (int k = 5; k <= 7; ++k) {
      const double E = approx(alpha, 1, k, k).error.to_double();
      CHECK(E < prev);
      prev = E;
      const double ratio = E / error_model(alpha, 1, k);
      CAPTURE(alpha);
      CAPTURE(k);
      CHECK(ratio > 0.5);
      CHECK(ratio < 1.0);
    }
  }
}

TEST_CASE("constant approximation has error one half") {
  for (double alpha : {0.3, 0.9}) {
    const auto r = compute_bura(alpha, 1, 0, 0);
    CHECK(r.error.to_double() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.eval(0.3) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("leveled system on the two-point reference") {
  const Precision p{256};
  const std::vector<XScalar> pts = {XScalar(-1.0, p), XScalar(1.0, p)};
  const std::vector<XScalar> fv = {XScalar(0.0, p), XScalar(1.0, p)};
  RemezConfig cfg;
  const auto sol = solve_leveled_system(pts, fv, XScalar(0.0, p), nullptr, 0, 0, cfg);
  CHECK(std::abs(sol.level.to_double()) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sol.r.eval_s(XScalar(0.0, p)).to_double() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("uniform seed points") {
  const auto pts = seed_points(SeedReference::uniform, 4, 0.0, Precision{128});
  REQUIRE(pts.size() == 4u);
  CHECK(pts[0].to_double() == -1.0);
  CHECK(pts[1].to_double() == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(pts[2].to_double() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(pts[3].to_double() == 1.0);
  CHECK_THROWS_AS(seed_points(SeedReference::uniform, 1, 0.0, Precision{128}), BadParameters);
}

TEST_CASE("the second extreme point sits near 3e-9 for alpha 0.75") {
  const auto& r = approx(0.75, 1, 5, 5);
  const double eta2 = r.extreme_points[1].to_double();
  CHECK(eta2 > 1e-9);
  CHECK(eta2 < 1e-8);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(compute_bura(0.0, 1, 5, 5), BadParameters);
  CHECK_THROWS_AS(compute_bura(1.0, 1, 5, 5), BadParameters);
  CHECK_THROWS_AS(compute_bura(0.5, 0, 5, 5), BadParameters);
  CHECK_THROWS_AS(compute_bura(0.5, 1, 6, 5), BadParameters);
  CHECK_THROWS_AS(compute_bura(0.5, 1, -1, 5), BadParameters);
  CHECK_THROWS_AS(compute_bura(0.5, 1, 40, 40), BadParameters);
  RemezConfig low;
  low.precision_bits = 24;
  CHECK_THROWS_AS(compute_bura(0.5, 1, 5, 5, low), BadParameters);
}

TEST_CASE("precision envelope at 53 bits") {
  RemezConfig cfg;
  cfg.precision_bits = 53;
  const auto r = compute_bura(0.25, 1, 5, 5, cfg);
  CHECK(rel_dev(r.error.to_double(), 2.8676e-5) < 1e-3);
  CHECK_THROWS_AS(compute_bura(0.75, 1, 7, 7, cfg), NonConvergence);
}
