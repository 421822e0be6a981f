#include <cmath>

#include "bura/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bura;
using testing::approx;
using testing::pform;
using testing::rel_dev;

TEST_CASE("partial fractions of the (5,5) 1-BURA for alpha 0.5") {
  const auto& pf = pform(0.5, 1, 5, 5);
  REQUIRE(pf.c0.size() == 1u);
  REQUIRE(pf.c.size() == 5u);
  CHECK(rel_dev(pf.c0[0], 2.68957e-4) < 2e-5);
  const double c[] = {5.58483e-03, 2.72036e-02, 9.65749e-02, 3.20207e-01, 2.51057e+00};
  const double d[] = {-1.22320e-05, -6.62106e-04, -1.27955e-02, -1.62631e-01, -3.21292e+00};
  for (int j = 0; j < 5; ++j) {
    CAPTURE(j);
    CHECK(rel_dev(pf.c[j], c[j]) < 2e-5);
    CHECK(rel_dev(pf.d[j], d[j]) < 2e-5);
  }
}

TEST_CASE("partial fractions of the (5,5) 1-BURA for alpha 0.25 and 0.75") {
  const auto& q = pform(0.25, 1, 5, 5);
  const double c25[] = {1.27509e-03, 9.58752e-03, 4.86842e-02, 2.55382e-01, 8.92729e+00};
  const double d25[] = {-1.59055e-04, -3.96701e-03, -4.47241e-02, -3.97136e-01, -1.07506e+01};
  CHECK(rel_dev(q.c0[0], 2.86755e-05) < 2e-5);
  for (int j = 0; j < 5; ++j) {
    CHECK(rel_dev(q.c[j], c25[j]) < 2e-5);
    CHECK(rel_dev(q.d[j], d25[j]) < 2e-5);
  }
  const auto& p = pform(0.75, 1, 5, 5);
  const double c75[] = {2.28202e-02, 6.31334e-02, 1.45484e-01, 3.05748e-01, 8.60558e-01};
  const double d75[] = {-3.27111e-08, -1.14734e-05, -8.15164e-04, -2.80630e-02, -8.47443e-01};
  CHECK(rel_dev(p.c0[0], 2.73478e-03) < 2e-5);
  for (int j = 0; j < 5; ++j) {
    CHECK(rel_dev(p.c[j], c75[j]) < 2e-5);
    CHECK(rel_dev(p.d[j], d75[j]) < 2e-5);
  }
}

TEST_CASE("beta 2 form carries two inverse-power coefficients") {
  const auto& pf = pform(0.25, 2, 7, 6);
  REQUIRE(pf.c0.size() == 2u);
  REQUIRE(pf.c.size() == 6u);
  CHECK(rel_dev(pf.c0[0], 7.38825e-04) < 2e-5);
  CHECK(rel_dev(pf.c0[1], -1.8043e-08) < 2e-5);
  CHECK(rel_dev(pf.c[5], 1.81241e+01) < 2e-5);
  CHECK(rel_dev(pf.d[5], -2.83519e+01) < 2e-5);
  // c0_beta is r(0) = -E for beta = 2.
  CHECK(rel_dev(-pf.c0[1], pf.error) < 1e-10);
}

TEST_CASE("largest pole of the (7,7) 1-BURA for alpha 0.75 within the cross-table tolerance") {
  const auto& pf = pform(0.75, 1, 7, 7);
  CHECK(rel_dev(pf.c[6], 8.94453e-01) < 1e-2);
  CHECK(rel_dev(pf.d[6], -1.30039e+00) < 1e-2);
  CHECK(rel_dev(pf.c0[0], 7.8650e-4) < 1e-2);
}

TEST_CASE("sign and ordering invariants") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto& pf = pform(alpha, 1, 5, 5);
    for (std::size_t j = 0; j < pf.c.size(); ++j) {
      CHECK(pf.c[j] > 0.0);
      CHECK(pf.d[j] < 0.0);
      if (j > 0) CHECK(pf.d[j] < pf.d[j - 1]);
    }
    CHECK(rel_dev(pf.c0[0], pf.error) < 1e-10);
  }
}

TEST_CASE("zeros and poles interlace for diagonal 1-BURA") {
  const auto zp = extract_zeros_poles(approx(0.5, 1, 5, 5));
  const auto z = zp.zeros_d(), d = zp.poles_d();
  REQUIRE(z.size() == 5u);
  REQUIRE(d.size() == 5u);
  // 0 > zeta_1 > d_1 > zeta_2 > d_2 > ...
  double prev = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(z[j] < prev);
    CHECK(d[j] < z[j]);
    prev = d[j];
  }
  const auto& pf = pform(0.5, 1, 5, 5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(rel_dev(d[j], pf.d[j]) < 1e-14);
}

TEST_CASE("partial fraction, product and rational forms agree") {
  for (double alpha : {0.25, 0.75}) {
    const auto& r = approx(alpha, 1, 6, 6);
    const auto& pf = pform(alpha, 1, 6, 6);
    const auto zp = extract_zeros_poles(r);
    const Precision p{r.precision_bits};
    for (int i = 0; i <= 60; ++i) {
      const double td = std::pow(10.0, -12.0 + 12.0 * i / 60.0);
      const XScalar t(td, p);
      const XScalar ref = r.eval(t);
      // pf_eval returns t^-beta r(t).
      const XScalar via_pf = pf_eval(pf, t) * t;
      CHECK(abs(via_pf - ref).to_double() <= 1e-30 * std::max(1.0, abs(ref).to_double()));
      CHECK(abs(product_eval(zp, t) - ref).to_double() <= 1e-30 * std::max(1.0, abs(ref).to_double()));
      CHECK(std::abs(pf_eval(pf, td) * td - ref.to_double()) <= 1e-13);
    }
  }
}

TEST_CASE("pf_eval approximates t^-alpha within E / t") {
  const auto& pf = pform(0.5, 1, 5, 5);
  for (double t : {1e-6, 1e-3, 0.1, 0.5, 1.0}) {
    CAPTURE(t);
    CHECK(std::abs(pf_eval(pf, t) - 1.0 / std::sqrt(t)) <= pf.error / t * (1.0 + 1e-8));
  }
  // The pole sum at t = 1 reproduces r(1) = 1 - E up to sign.
  CHECK(std::abs(std::abs(pf_eval(pf, 1.0) - 1.0) - pf.error) < 1e-12);
}

TEST_CASE("asymptotic error model") {
  // Values printed in parentheses beside the diagonal errors.
  CHECK(rel_dev(error_model(0.75, 1, 7), 9.82e-4) < 5e-3);
  CHECK(rel_dev(error_model(0.5, 1, 5), 3.88e-4) < 5e-3);
  CHECK(rel_dev(error_model(0.5, 1, 7), 6.28e-5) < 5e-3);
  CHECK(rel_dev(error_model(0.25, 1, 5), 4.16e-5) < 5e-3);
  CHECK(rel_dev(error_model(0.25, 1, 7), 4.47e-6) < 5e-3);
  // g = 1/4, k = 5: 4^1.25 sin(pi/4) exp(-2 pi sqrt(1.25)).
  const double g = 0.25;
  CHECK(error_model(0.75, 1, 5) == doctest::Approx(std::pow(4.0, 1 + g) * std::sin(M_PI * g) *
                                                   std::exp(-2 * M_PI * std::sqrt(g * 5)))
                                       .epsilon(1e-14));
  CHECK(rel_dev(error_model(0.75, 1, 5), 3.5581e-3) < 1e-4);
}

TEST_CASE("higher-beta diagonal approximants without a usable pole structure") {
  CHECK_THROWS_AS(to_partial_fractions(approx(0.5, 2, 5, 5)), InterlacingViolated);
  CHECK_THROWS_AS(to_partial_fractions(approx(0.5, 3, 5, 5)), ComplexPolesDetected);
}

TEST_CASE("complex numerator zeros do not block the pole form") {
  const auto& pf = pform(0.5, 3, 5, 3);
  CHECK(pf.c0.size() == 3u);
  CHECK(pf.c.size() == 3u);
  CHECK_THROWS_AS(extract_zeros_poles(approx(0.5, 3, 5, 3)), ComplexPolesDetected);
}

TEST_CASE("validate_partial_fractions rejects tampered forms") {
  const auto& r = approx(0.5, 1, 5, 5);
  auto pf = pform(0.5, 1, 5, 5);
  CHECK_NOTHROW(validate_partial_fractions(pf, r));

  auto moved = pf;
  moved.d_x[2] = moved.d_x[2] * XScalar(1.001, Precision{256});
  CHECK_THROWS_AS(validate_partial_fractions(moved, r), Error);

  auto positive = pf;
  positive.d_x[0] = -positive.d_x[0];
  CHECK_THROWS_AS(validate_partial_fractions(positive, r), InterlacingViolated);

  auto short_form = pf;
  short_form.c_x.pop_back();
  CHECK_THROWS_AS(validate_partial_fractions(short_form, r), InvariantViolated);
}
