#include <random>

#include "bura/errors.hpp"
#include "bura/xnum.hpp"
#include "doctest.h"

using namespace bura;

namespace {

const Precision p128{128};
const Precision p256{256};

XScalar x(double v, Precision p = p256) { return XScalar(v, p); }

ChebPoly cheb(std::initializer_list<double> c, Precision p = p256) {
  ChebPoly out;
  for (double v : c) out.coeffs.emplace_back(v, p);
  return out;
}

double rel(const XScalar& a, const XScalar& b) {
  if (b.is_zero()) return abs(a).to_double();
  return abs((a - b) / b).to_double();
}

// T_j(s) by the trigonometric definition, in double.
double cheb_direct(int j, double s) { return std::cos(j * std::acos(s)); }

}  // namespace

TEST_CASE("arithmetic runs at the wider operand precision") {
  XScalar a(1.0, Precision{64}), b(3.0, Precision{200});
  CHECK((a / b).bits() == 200);
  CHECK((b - a).bits() == 200);
  CHECK_THROWS_AS(XScalar("not a number", p128), std::invalid_argument);
}

TEST_CASE("conversion to double rounds to nearest") {
  // 1 + 2^-53 is a tie and rounds to even; 1 + 3 * 2^-54 rounds up.
  XScalar tie = x(1.0) + ldexp_one(-53, p256);
  CHECK(tie.to_double() == 1.0);
  XScalar up = x(1.0) + ldexp_one(-53, p256) + ldexp_one(-54, p256);
  CHECK(up.to_double() == std::nextafter(1.0, 2.0));
}

TEST_CASE("decimal strings reload to the same binary value") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 50; ++i) {
    XScalar v = exp(x(u(gen))) / const_pi(p256);
    XScalar back(v.to_string(), p256);
    CHECK(back == v);
  }
  CHECK(from_decimal_double(0.1, p256) == XScalar("0.1", p256));
}

TEST_CASE("cheb_eval on the basis polynomials") {
  CHECK(cheb_eval(cheb({1}), x(0.37)).to_double() == 1.0);
  CHECK(cheb_eval(cheb({0, 1}), x(-1)).to_double() == -1.0);
  // T_2(s) = 2 s^2 - 1
  CHECK(cheb_eval(cheb({0, 0, 1}), x(0.5)).to_double() == doctest::Approx(2 * 0.25 - 1).epsilon(1e-15));
  for (int j = 0; j <= 8; ++j) {
    ChebPoly p;
    for (int i = 0; i <= j; ++i) p.coeffs.emplace_back(i == j ? 1.0 : 0.0, p256);
    for (double s : {-0.9, -0.3, 0.1, 0.77}) CHECK(cheb_eval(p, x(s)).to_double() == doctest::Approx(cheb_direct(j, s)));
  }
}

TEST_CASE("monomial to shifted Chebyshev conversion") {
  // t = (1 + s) / 2
  auto p = monomial_to_cheb({x(0), x(1)});
  REQUIRE(p.coeffs.size() == 2);
  CHECK(p.coeffs[0].to_double() == 0.5);
  CHECK(p.coeffs[1].to_double() == 0.5);

  auto one = monomial_to_cheb({x(1)});
  REQUIRE(one.coeffs.size() == 1);
  CHECK(one.coeffs[0].to_double() == 1.0);

  // t^2 = (1 + 2s + s^2) / 4 = 3/8 T0 + 1/2 T1 + 1/8 T2
  auto sq = monomial_to_cheb({x(0), x(0), x(1)});
  REQUIRE(sq.coeffs.size() == 3);
  CHECK(sq.coeffs[0].to_double() == 0.375);
  CHECK(sq.coeffs[1].to_double() == 0.5);
  CHECK(sq.coeffs[2].to_double() == 0.125);
}

TEST_CASE("monomial round trip and Clenshaw against Horner at 128 bits") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int deg = 0; deg <= 12; ++deg) {
    std::vector<XScalar> mono;
    for (int j = 0; j <= deg; ++j) mono.emplace_back(u(gen), p128);
    const auto c = monomial_to_cheb(mono);
    const auto back = cheb_to_monomial(c);
    REQUIRE(back.size() >= mono.size());
    const double tol = std::ldexp(1.0, 1 - 128) * (deg * deg + 1) * 8;
    for (int j = 0; j <= deg; ++j) {
      const double scale = std::max(1.0, std::abs(mono[j].to_double()));
      CHECK(abs(back[j] - mono[j]).to_double() <= tol * scale);
    }
    for (int i = 0; i < 100; ++i) {
      const XScalar s(u(gen), p128);
      const XScalar t = (s + XScalar(1.0, p128)) / XScalar(2.0, p128);
      const XScalar a = cheb_eval(c, s), b = monomial_eval(mono, t);
      CHECK(abs(a - b).to_double() <= 1e-12 * std::max(1.0, abs(b).to_double()));
    }
  }
}

TEST_CASE("cheb_derivative matches a central difference") {
  const auto p = cheb({0.3, -1.2, 0.7, 2.5, -0.4});
  const auto dp = cheb_derivative(p);
  CHECK(dp.degree() == 3);
  const XScalar h = ldexp_one(-60, p256);
  for (double s : {-0.8, 0.0, 0.45}) {
    XScalar fd = (cheb_eval(p, x(s) + h) - cheb_eval(p, x(s) - h)) / (h * XScalar(2.0, p256));
    CHECK(rel(cheb_eval(dp, x(s)), fd) < 1e-30);
  }
}

TEST_CASE("dense_solve small systems") {
  SUBCASE("identity") {
    XMatrix M(3, std::vector<XScalar>(3, x(0)));
    for (int i = 0; i < 3; ++i) M[i][i] = x(1);
    auto sol = dense_solve(M, {x(1), x(2), x(3)});
    CHECK(sol[0].to_double() == 1.0);
    CHECK(sol[1].to_double() == 2.0);
    CHECK(sol[2].to_double() == 3.0);
  }
  SUBCASE("diagonal") {
    XMatrix M = {{x(2), x(0)}, {x(0), x(4)}};
    auto sol = dense_solve(M, {x(2), x(2)});
    CHECK(sol[0].to_double() == 1.0);
    CHECK(sol[1].to_double() == 0.5);
  }
  SUBCASE("Hilbert 4x4 with row-sum right-hand side") {
    XMatrix H(4, std::vector<XScalar>(4, x(0)));
    std::vector<XScalar> b(4, x(0));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        H[i][j] = x(1) / XScalar(static_cast<long>(i + j + 1), p256);
        b[i] += H[i][j];
      }
    auto sol = dense_solve(H, b);
    for (const auto& v : sol) CHECK(abs(v - x(1)).to_double() < 1e-70);
  }
  SUBCASE("singular") {
    XMatrix M = {{x(1), x(2)}, {x(2), x(4)}};
    CHECK_THROWS_AS(dense_solve(M, {x(1), x(1)}), SingularMatrix);
  }
  SUBCASE("cap") {
    DenseSolveOptions opt;
    opt.cap = 2;
    XMatrix M(3, std::vector<XScalar>(3, x(1)));
    CHECK_THROWS(dense_solve(M, {x(1), x(1), x(1)}, opt));
  }
}

TEST_CASE("dense_solve residual bound on random well-conditioned systems") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 24);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(gen);
    XMatrix M(n, std::vector<XScalar>(n, x(0)));
    std::vector<XScalar> b;
    // Diagonal dominance keeps the condition number small.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M[i][j] = x(u(gen));
      M[i][i] = x(n + 1.0 + u(gen));
      b.push_back(x(u(gen)));
    }
    const auto sol = dense_solve(M, b);
    XScalar normM = x(0), normx = x(0), res = x(0);
    for (int i = 0; i < n; ++i) {
      XScalar row = x(0), r = -b[i];
      for (int j = 0; j < n; ++j) {
        row += abs(M[i][j]);
        r += M[i][j] * sol[j];
      }
      if (row > normM) normM = row;
      if (abs(sol[i]) > normx) normx = abs(sol[i]);
      if (abs(r) > res) res = abs(r);
    }
    const XScalar bound = XScalar(static_cast<long>(n), p256) * ldexp_one(-256 + 8, p256) * normM * normx;
    CHECK(res <= bound);
  }
}

TEST_CASE("poly_roots on simple polynomials") {
  // t - 0.25 = (s + 1)/2 - 0.25 = 0.25 + 0.5 s
  auto r1 = poly_roots(cheb({0.25, 0.5}));
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].re.to_double() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r1[0].im.is_zero());

  auto q = monomial_to_cheb({x(-1), x(0), x(1)});  // t^2 - 1
  auto r2 = poly_roots(q);
  REQUIRE(r2.size() == 2);
  CHECK(r2[0].re.to_double() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r2[1].re.to_double() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("poly_roots reconstruction reproduces the polynomial at 128 bits") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int deg = 1; deg <= 10; ++deg) {
    ChebPoly q;
    for (int j = 0; j <= deg; ++j) q.coeffs.emplace_back(u(gen), p128);
    const auto roots = poly_roots(q);
    REQUIRE(roots.size() == static_cast<std::size_t>(deg));
    for (std::size_t i = 1; i < roots.size(); ++i) CHECK(roots[i - 1].re >= roots[i].re);
    const XScalar lead = cheb_to_monomial(q).back();
    XScalar maxp(0.0, p128), maxdiff(0.0, p128);
    for (int g = 0; g < 50; ++g) {
      const XScalar t(g / 49.0, p128);
      XScalar re = lead, im(0.0, p128);
      for (const auto& z : roots) {
        const XScalar a = t - z.re, b = -z.im;
        const XScalar nre = re * a - im * b;
        im = re * b + im * a;
        re = nre;
      }
      const XScalar pv = cheb_eval(q, t * XScalar(2.0, p128) - XScalar(1.0, p128));
      if (abs(pv) > maxp) maxp = abs(pv);
      const XScalar d = abs(pv - re) + abs(im);
      if (d > maxdiff) maxdiff = d;
    }
    CHECK(maxdiff.to_double() <= 1e-10 * maxp.to_double());
  }
}
