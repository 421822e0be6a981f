#include "bura/xnum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "bura/errors.hpp"

namespace bura {

namespace {

mpfr_prec_t max_prec(const XScalar& a, const XScalar& b) { return std::max(a.bits(), b.bits()); }

}  // namespace

XScalar::XScalar(Precision p) {
  mpfr_init2(v_, p.bits);
  mpfr_set_zero(v_, 1);
}

XScalar::XScalar(double v, Precision p) {
  mpfr_init2(v_, p.bits);
  mpfr_set_d(v_, v, MPFR_RNDN);
}

XScalar::XScalar(long v, Precision p) {
  mpfr_init2(v_, p.bits);
  mpfr_set_si(v_, v, MPFR_RNDN);
}

XScalar::XScalar(const std::string& s, Precision p) {
  mpfr_init2(v_, p.bits);
  if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    mpfr_clear(v_);
    throw std::invalid_argument("not a decimal number: '" + s + "'");
  }
}

XScalar::XScalar(const XScalar& o) {
  mpfr_init2(v_, o.bits());
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

XScalar::XScalar(XScalar&& o) noexcept {
  // Steal the limbs and leave the source as a valid 2-bit zero.
  v_[0] = o.v_[0];
  mpfr_init2(o.v_, MPFR_PREC_MIN);
  mpfr_set_zero(o.v_, 1);
}

XScalar& XScalar::operator=(const XScalar& o) {
  if (this != &o) {
    if (bits() != o.bits()) mpfr_set_prec(v_, o.bits());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

XScalar& XScalar::operator=(XScalar&& o) noexcept {
  if (this != &o) mpfr_swap(v_, o.v_);
  return *this;
}

XScalar::~XScalar() { mpfr_clear(v_); }

std::string XScalar::to_string(int digits) const {
  if (digits <= 0) digits = static_cast<int>(bits() / 3 + 2);
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

// Compound operators widen the destination when the other operand is wider.
#define BURA_XS_COMPOUND(op, fn)                                    \
  XScalar& XScalar::operator op(const XScalar& o) {                \
    if (o.bits() > bits()) mpfr_prec_round(v_, o.bits(), MPFR_RNDN); \
    fn(v_, v_, o.v_, MPFR_RNDN);                                    \
    return *this;                                                   \
  }
BURA_XS_COMPOUND(+=, mpfr_add)
BURA_XS_COMPOUND(-=, mpfr_sub)
BURA_XS_COMPOUND(*=, mpfr_mul)
BURA_XS_COMPOUND(/=, mpfr_div)
#undef BURA_XS_COMPOUND

XScalar& XScalar::operator*=(long o) {
  mpfr_mul_si(v_, v_, o, MPFR_RNDN);
  return *this;
}

XScalar& XScalar::operator/=(long o) {
  mpfr_div_si(v_, v_, o, MPFR_RNDN);
  return *this;
}

XScalar operator-(const XScalar& a) {
  XScalar r(a.precision());
  mpfr_neg(r.v_, a.v_, MPFR_RNDN);
  return r;
}

#define BURA_XS_BINARY(op, fn)                                 \
  XScalar operator op(const XScalar& a, const XScalar& b) {   \
    XScalar r(Precision{max_prec(a, b)});                     \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                           \
    return r;                                                  \
  }
BURA_XS_BINARY(+, mpfr_add)
BURA_XS_BINARY(-, mpfr_sub)
BURA_XS_BINARY(*, mpfr_mul)
BURA_XS_BINARY(/, mpfr_div)
#undef BURA_XS_BINARY

XScalar abs(const XScalar& x) {
  XScalar r(x.precision());
  mpfr_abs(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

XScalar sqrt(const XScalar& x) {
  XScalar r(x.precision());
  mpfr_sqrt(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

XScalar pow(const XScalar& x, const XScalar& y) {
  XScalar r(Precision{max_prec(x, y)});
  mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
  return r;
}

XScalar pow(const XScalar& x, long n) {
  XScalar r(x.precision());
  mpfr_pow_si(r.raw(), x.raw(), n, MPFR_RNDN);
  return r;
}

XScalar exp(const XScalar& x) {
  XScalar r(x.precision());
  mpfr_exp(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

XScalar log(const XScalar& x) {
  XScalar r(x.precision());
  mpfr_log(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

XScalar const_pi(Precision p) {
  XScalar r(p);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

XScalar ldexp_one(long e, Precision p) {
  XScalar r(1L, p);
  mpfr_mul_2si(r.raw(), r.raw(), e, MPFR_RNDN);
  return r;
}

XScalar from_decimal_double(double v, Precision p) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return XScalar(std::string(buf, res.ptr), p);
}

std::ostream& operator<<(std::ostream& os, const XScalar& x) {
  return os << x.to_string(static_cast<int>(std::min<std::streamsize>(os.precision(), 60)));
}

XScalar cheb_eval(const ChebPoly& p, const XScalar& s) {
  const Precision prec{std::max(p.precision().bits, s.bits())};
  XScalar b1(prec), b2(prec), tmp(prec);
  XScalar two_s = s;
  two_s *= 2L;
  for (std::size_t j = p.coeffs.size(); j-- > 1;) {
    // b_j = c_j + 2 s b_{j+1} - b_{j+2}
    tmp = two_s * b1;
    tmp -= b2;
    tmp += p.coeffs[j];
    b2 = std::move(b1);
    b1 = std::move(tmp);
    tmp = XScalar(prec);
  }
  if (p.coeffs.empty()) return XScalar(prec);
  XScalar out = s * b1;
  out -= b2;
  out += p.coeffs[0];
  return out;
}

ChebPoly cheb_derivative(const ChebPoly& p) {
  const std::size_t n = p.degree();
  const Precision prec = p.precision();
  ChebPoly d;
  if (n == 0) {
    d.coeffs.assign(1, XScalar(prec));
    return d;
  }
  // Backward recurrence: d_{j-1} = d_{j+1} + 2 j c_j, then halve d_0.
  std::vector<XScalar> dc(n + 1, XScalar(prec));
  for (std::size_t j = n; j >= 1; --j) {
    XScalar term = p.coeffs[j];
    term *= static_cast<long>(2 * j);
    dc[j - 1] = (j + 1 <= n ? dc[j + 1] : XScalar(prec)) + term;
  }
  dc[0] /= 2L;
  dc.pop_back();
  d.coeffs = std::move(dc);
  d.padded = true;
  return d;
}

namespace {

// c(s) * t with t = (1 + s)/2, using s T_j = (T_{j+1} + T_{|j-1|})/2.
std::vector<XScalar> times_t(const std::vector<XScalar>& c, Precision prec) {
  std::vector<XScalar> out(c.size() + 1, XScalar(prec));
  for (std::size_t j = 0; j < c.size(); ++j) {
    XScalar half = c[j];
    half /= 2L;
    out[j] += half;
    if (j == 0) {
      out[1] += half;
    } else {
      XScalar quarter = half;
      quarter /= 2L;
      out[j + 1] += quarter;
      out[j - 1] += quarter;
    }
  }
  return out;
}

}  // namespace

ChebPoly monomial_to_cheb(const std::vector<XScalar>& mono) {
  ChebPoly out;
  if (mono.empty()) return out;
  const Precision prec = mono.front().precision();
  std::vector<XScalar> acc{mono.back()};
  for (std::size_t j = mono.size() - 1; j-- > 0;) {
    acc = times_t(acc, prec);
    acc[0] += mono[j];
  }
  out.coeffs = std::move(acc);
  out.padded = mono.back().is_zero();
  return out;
}

std::vector<XScalar> cheb_to_monomial(const ChebPoly& p) {
  if (p.coeffs.empty()) return {};
  const Precision prec = p.precision();
  const std::size_t n = p.coeffs.size();
  std::vector<XScalar> out(n, XScalar(prec));
  // Monomial expansions of T_{j-1}(2t-1) and T_j(2t-1).
  std::vector<XScalar> prev(n, XScalar(prec)), cur(n, XScalar(prec));
  prev[0] = XScalar(1L, prec);
  if (n > 1) {
    cur[0] = XScalar(-1L, prec);
    cur[1] = XScalar(2L, prec);
  }
  for (std::size_t i = 0; i < n; ++i) out[i] += p.coeffs[0] * prev[i];
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) out[i] += p.coeffs[j] * cur[i];
    if (j + 1 == n) break;
    // T_{j+1} = (4t - 2) T_j - T_{j-1}
    std::vector<XScalar> next(n, XScalar(prec));
    for (std::size_t i = 0; i <= j; ++i) {
      XScalar a = cur[i];
      a *= 2L;
      next[i] -= a;
      a *= 2L;
      next[i + 1] += a;
      next[i] -= prev[i];
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

XScalar monomial_eval(const std::vector<XScalar>& mono, const XScalar& t) {
  if (mono.empty()) return XScalar(t.precision());
  XScalar acc = mono.back();
  for (std::size_t j = mono.size() - 1; j-- > 0;) {
    acc *= t;
    acc += mono[j];
  }
  return acc;
}

std::vector<XScalar> dense_solve(XMatrix M, std::vector<XScalar> b, const DenseSolveOptions& opt) {
  const std::size_t n = M.size();
  if (n == 0) return {};
  if (n > opt.cap) throw BadParameters("dense_solve: dimension " + std::to_string(n) + " exceeds cap");
  if (b.size() != n) throw BadParameters("dense_solve: right-hand side length mismatch");
  for (const auto& row : M)
    if (row.size() != n) throw BadParameters("dense_solve: matrix is not square");

  const Precision prec = M[0][0].precision();
  // Equilibrate columns to unit max-norm; the pivot test then measures
  // near-dependence instead of column scale.  Undone on the solution.
  std::vector<XScalar> colscale(n, XScalar(prec));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i)
      if (mpfr_cmpabs(M[i][j].raw(), colscale[j].raw()) > 0) colscale[j] = abs(M[i][j]);
    if (colscale[j].is_zero()) throw SingularMatrix("dense_solve: zero column " + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) M[i][j] /= colscale[j];
  }
  const XScalar scale(1L, prec);
  const long e = opt.pivot_exponent > 0 ? opt.pivot_exponent : static_cast<long>(prec.bits / 2);
  XScalar threshold = scale * ldexp_one(-e, prec);

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (mpfr_cmpabs(M[r][c].raw(), M[piv][c].raw()) > 0) piv = r;
    if (mpfr_cmpabs(M[piv][c].raw(), threshold.raw()) < 0)
      throw SingularMatrix("dense_solve: pivot below threshold in column " + std::to_string(c));
    std::swap(M[piv], M[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (M[r][c].is_zero()) continue;
      XScalar f = M[r][c] / M[c][c];
      for (std::size_t j = c + 1; j < n; ++j) M[r][j] -= f * M[c][j];
      b[r] -= f * b[c];
      M[r][c] = XScalar(prec);
    }
  }
  std::vector<XScalar> x(n, XScalar(prec));
  for (std::size_t i = n; i-- > 0;) {
    XScalar acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= M[i][j] * x[j];
    x[i] = acc / M[i][i];
  }
  for (std::size_t j = 0; j < n; ++j) x[j] /= colscale[j];
  return x;
}

namespace {

XComplex cadd(const XComplex& a, const XComplex& b) { return {a.re + b.re, a.im + b.im}; }
XComplex csub(const XComplex& a, const XComplex& b) { return {a.re - b.re, a.im - b.im}; }
XComplex cmul(const XComplex& a, const XComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
XComplex cdiv(const XComplex& a, const XComplex& b) {
  XScalar den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
XScalar cabs(const XComplex& a) { return sqrt(a.re * a.re + a.im * a.im); }

// Complex Clenshaw recurrence.
XComplex ceval(const ChebPoly& p, const XComplex& z) {
  const Precision prec = p.precision();
  XComplex b1{XScalar(prec), XScalar(prec)}, b2 = b1;
  XComplex two_z{z.re, z.im};
  two_z.re *= 2L;
  two_z.im *= 2L;
  for (std::size_t j = p.coeffs.size(); j-- > 1;) {
    XComplex t = csub(cmul(two_z, b1), b2);
    t.re += p.coeffs[j];
    b2 = std::move(b1);
    b1 = std::move(t);
  }
  XComplex out = csub(cmul(z, b1), b2);
  out.re += p.coeffs[0];
  return out;
}

std::vector<std::complex<double>> colleague_estimates(const ChebPoly& q, std::size_t n) {
  if (n == 1) return {std::complex<double>(-q.coeffs[0].to_double() / q.coeffs[1].to_double(), 0.0)};
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  C(0, 1) = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = 0.5;
    if (j + 1 < n) C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) = 0.5;
  }
  const double lead = q.coeffs[n].to_double();
  for (std::size_t i = 0; i < n; ++i)
    C(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(i)) -= q.coeffs[i].to_double() / (2.0 * lead);
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace

std::vector<XComplex> poly_roots(const ChebPoly& q_in) {
  ChebPoly q = q_in;
  while (q.coeffs.size() > 1 && q.coeffs.back().is_zero()) q.coeffs.pop_back();
  const std::size_t n = q.degree();
  if (n < 1) throw BadParameters("poly_roots: degree must be at least one");
  const Precision prec = q.precision();
  const ChebPoly dq = cheb_derivative(q);

  auto est = colleague_estimates(q, n);
  // Separate coincident estimates; Aberth's correction needs distinct starts.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(est[i] - est[j]) <= 1e-14 * (1.0 + std::abs(est[i])))
        est[i] += std::complex<double>(1e-9 * (1.0 + std::abs(est[i])), 0.0);
  // Real starts never leave the real axis, and a close complex pair often
  // comes back from the double eigensolve as two real values.
  for (auto& e : est)
    if (e.imag() == 0.0) e += std::complex<double>(0.0, 1e-8 * (1.0 + std::abs(e)));

  std::vector<XComplex> z;
  z.reserve(n);
  for (const auto& e : est) z.push_back({XScalar(e.real(), prec), XScalar(e.imag(), prec)});

  XScalar abs_sum(prec);
  for (const auto& c : q.coeffs) abs_sum += abs(c);
  const XScalar rtol = ldexp_one(-static_cast<long>(prec.bits) + 16, prec);
  const XScalar step_tol = ldexp_one(-static_cast<long>(prec.bits) + 8, prec);

  auto bound_scale = [&](const XComplex& zi) {
    // Generous bound for sum |c_j| |T_j(z)|.
    XScalar r = cabs(zi);
    XScalar rho = r + sqrt(r * r + XScalar(1L, prec));
    XScalar acc(prec), power(1L, prec);
    for (const auto& c : q.coeffs) {
      acc += abs(c) * power;
      power *= rho;
    }
    return acc;
  };

  std::vector<bool> done(n, false);
  for (int it = 0; it < 100; ++it) {
    bool all_done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      XComplex pv = ceval(q, z[i]);
      XComplex dv = ceval(dq, z[i]);
      XScalar res = cabs(pv);
      if (res <= rtol * bound_scale(z[i])) {
        done[i] = true;
        continue;
      }
      all_done = false;
      XComplex w = cdiv(pv, dv);
      XComplex sum{XScalar(prec), XScalar(prec)};
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        sum = cadd(sum, cdiv(XComplex{XScalar(1L, prec), XScalar(prec)}, csub(z[i], z[j])));
      }
      XComplex denom = csub(XComplex{XScalar(1L, prec), XScalar(prec)}, cmul(w, sum));
      XComplex delta = cdiv(w, denom);
      z[i] = csub(z[i], delta);
      if (cabs(delta) <= step_tol * (XScalar(1L, prec) + cabs(z[i]))) {
        XComplex pv2 = ceval(q, z[i]);
        if (cabs(pv2) <= rtol * bound_scale(z[i])) done[i] = true;
      }
    }
    if (all_done) break;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!done[i]) {
      XComplex pv = ceval(q, z[i]);
      if (!(cabs(pv) <= rtol * bound_scale(z[i])))
        throw RootPolishDiverged("poly_roots: root " + std::to_string(i) + " near s = " +
                                 std::to_string(z[i].re.to_double()) + " did not converge");
    }

  std::vector<XComplex> out;
  out.reserve(n);
  for (auto& zi : z) {
    XComplex t{zi.re + XScalar(1L, prec), zi.im};
    t.re /= 2L;
    t.im /= 2L;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const XComplex& a, const XComplex& b) { return a.re > b.re; });
  return out;
}

}  // namespace bura
