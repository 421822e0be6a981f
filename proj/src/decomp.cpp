#include "bura/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bura/errors.hpp"

namespace bura {

namespace {

XScalar one(Precision p) { return XScalar(1L, p); }

XScalar t_to_s(const XScalar& t) {
  XScalar s = t;
  s *= 2L;
  s -= one(t.precision());
  return s;
}

ChebPoly trimmed(const ChebPoly& p) {
  ChebPoly q = p;
  while (q.coeffs.size() > 1 && q.coeffs.back().is_zero()) q.coeffs.pop_back();
  return q;
}

// Leading t-coefficient of sum c_j T_j(2t - 1): T_j contributes 2^(2j-1) t^j.
XScalar leading_t_coeff(const ChebPoly& p) {
  const std::size_t n = p.degree();
  XScalar c = p.coeffs[n];
  if (n >= 1) c *= ldexp_one(static_cast<long>(2 * n - 1), c.precision());
  return c;
}

std::vector<XScalar> real_roots(const ChebPoly& p_in, const char* what) {
  ChebPoly p = trimmed(p_in);
  std::vector<XScalar> out;
  if (p.degree() == 0) return out;
  const Precision prec = p.precision();
  const XScalar tol = ldexp_one(-static_cast<long>(prec.bits / 2), prec);
  for (auto& z : poly_roots(p)) {
    XScalar scale = abs(z.re);
    if (scale < one(prec)) scale = one(prec);
    if (abs(z.im) > tol * scale)
      throw ComplexPolesDetected(std::string(what) + " root " + std::to_string(z.re.to_double()) + " + " +
                                 std::to_string(z.im.to_double()) + "i is not real");
    out.push_back(std::move(z.re));
  }
  return out;
}

double rel_dev(const XScalar& a, const XScalar& b) {
  if (b.is_zero()) return abs(a).to_double();
  return abs((a - b) / b).to_double();
}

std::vector<double> to_doubles(const std::vector<XScalar>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.to_double());
  return out;
}

void check_poles(const std::vector<XScalar>& poles) {
  for (std::size_t j = 0; j < poles.size(); ++j) {
    if (poles[j].sign() >= 0)
      throw InterlacingViolated("pole " + std::to_string(j + 1) + " = " + std::to_string(poles[j].to_double()) +
                                " is not negative");
    if (j > 0 && !(poles[j] < poles[j - 1]))
      throw InterlacingViolated("poles are not strictly decreasing at index " + std::to_string(j + 1));
  }
}

}  // namespace

std::vector<double> ZeroPoleSet::zeros_d() const { return to_doubles(zeros); }
std::vector<double> ZeroPoleSet::poles_d() const { return to_doubles(poles); }

ZeroPoleSet extract_zeros_poles(const RationalApproximant& r) {
  ZeroPoleSet zp;
  zp.poles = real_roots(r.den, "denominator");
  check_poles(zp.poles);
  zp.zeros = real_roots(r.num, "numerator");
  zp.lead = leading_t_coeff(trimmed(r.num)) / leading_t_coeff(trimmed(r.den));
  if (r.m == r.k && r.beta == 1 && zp.zeros.size() == zp.poles.size()) {
    // 0 > zeta_1 > d_1 > zeta_2 > ... > zeta_k > d_k
    XScalar upper{Precision{r.precision_bits}};
    for (std::size_t j = 0; j < zp.poles.size(); ++j) {
      if (!(zp.zeros[j] < upper && zp.poles[j] < zp.zeros[j]))
        throw InterlacingViolated("zeros and poles do not interlace at index " + std::to_string(j + 1));
      upper = zp.poles[j];
    }
  }
  return zp;
}

XScalar product_eval(const ZeroPoleSet& zp, const XScalar& t) {
  XScalar v = zp.lead;
  for (const auto& z : zp.zeros) v *= t - z;
  for (const auto& d : zp.poles) v /= t - d;
  return v;
}

PartialFractionForm to_partial_fractions(const RationalApproximant& r) {
  const Precision prec{r.precision_bits};
  // Only the poles enter the form; off-diagonal numerators may have complex zeros.
  ZeroPoleSet zp;
  zp.poles = real_roots(r.den, "denominator");
  check_poles(zp.poles);
  const std::size_t k = zp.poles.size();

  if (k >= 2) {
    const XScalar gap = ldexp_one(-static_cast<long>(r.precision_bits / 4), prec) * abs(zp.poles.back());
    for (std::size_t j = 1; j < k; ++j)
      if (abs(zp.poles[j - 1] - zp.poles[j]) < gap)
        throw InvariantViolated("poles " + std::to_string(j) + " and " + std::to_string(j + 1) +
                                " are closer than the simple-pole gap");
  }

  // P/Q = sum_j b*_j t^j + sum_j c*_j / (t - d_j).
  const ChebPoly dQ = cheb_derivative(r.den);
  std::vector<XScalar> cstar;
  cstar.reserve(k);
  for (const auto& d : zp.poles) {
    XScalar s = t_to_s(d);
    XScalar qp = cheb_eval(dQ, s);
    qp *= 2L;  // dQ/dt = 2 dQ/ds
    cstar.push_back(cheb_eval(r.num, s) / qp);
  }

  std::vector<XScalar> bstar(static_cast<std::size_t>(r.beta), XScalar(prec));
  {
    std::vector<XScalar> p = cheb_to_monomial(r.num);
    const std::vector<XScalar> q = cheb_to_monomial(trimmed(r.den));
    const int dq = static_cast<int>(q.size()) - 1;
    for (int deg = static_cast<int>(p.size()) - 1 - dq; deg >= 0; --deg) {
      XScalar b = p[static_cast<std::size_t>(deg + dq)] / q.back();
      for (int i = 0; i <= dq; ++i) p[static_cast<std::size_t>(deg + i)] -= b * q[static_cast<std::size_t>(i)];
      if (deg < r.beta) bstar[static_cast<std::size_t>(deg)] = std::move(b);
    }
  }

  PartialFractionForm pf;
  pf.alpha = r.alpha;
  pf.beta = r.beta;
  pf.m = r.m;
  pf.k = r.k;
  pf.precision_bits = r.precision_bits;
  pf.error_x = r.error;
  pf.d_x = zp.poles;
  for (int j = 1; j <= r.beta; ++j) {
    XScalar c0 = bstar[static_cast<std::size_t>(r.beta - j)];
    for (std::size_t i = 0; i < k; ++i) c0 -= cstar[i] / pow(zp.poles[i], static_cast<long>(r.beta - j + 1));
    pf.c0_x.push_back(std::move(c0));
  }
  for (std::size_t i = 0; i < k; ++i) pf.c_x.push_back(cstar[i] / pow(zp.poles[i], static_cast<long>(r.beta)));

  pf.c0 = to_doubles(pf.c0_x);
  pf.c = to_doubles(pf.c_x);
  pf.d = to_doubles(pf.d_x);
  pf.error = pf.error_x.to_double();

  validate_partial_fractions(pf, r);
  return pf;
}

void validate_partial_fractions(const PartialFractionForm& pf, const RationalApproximant& r) {
  const Precision prec{pf.precision_bits};
  if (pf.c0_x.size() != static_cast<std::size_t>(pf.beta) || pf.c_x.size() != pf.d_x.size())
    throw InvariantViolated("partial fraction form has inconsistent lengths");
  for (std::size_t j = 0; j < pf.d_x.size(); ++j) {
    if (pf.d_x[j].sign() >= 0) throw InterlacingViolated("pole " + std::to_string(j + 1) + " is not negative");
    if (j > 0 && !(pf.d_x[j] < pf.d_x[j - 1]))
      throw InterlacingViolated("poles are not strictly decreasing at index " + std::to_string(j + 1));
  }

  // |c_{0,beta}| = E
  const double dev0 = rel_dev(abs(pf.c0_x.back()), pf.error_x);
  if (!(dev0 <= 1e-8)) throw IdentityCheckFailed("c0_beta", dev0);

  // c_{0,1} + sum c_j = p_m/q_k when m - k = beta - 1, else 0.
  XScalar sum = pf.c0_x.front();
  for (const auto& c : pf.c_x) sum += c;
  XScalar target(prec);
  if (pf.m - pf.k == pf.beta - 1) target = leading_t_coeff(trimmed(r.num)) / leading_t_coeff(trimmed(r.den));
  const double scale = std::max(1.0, std::abs(target.to_double()));
  const double dev1 = abs(sum - target).to_double();
  if (!(dev1 <= 1e-10 * scale)) throw IdentityCheckFailed("sum", dev1);

  // t^beta times the pole form must give back r at the positive extreme points.
  // The sums above are blind to a moved pole; this is not.
  double dev2 = 0.0;
  for (const auto& t : r.extreme_points) {
    if (t.sign() <= 0) continue;
    const XScalar diff = pf_eval(pf, t) * pow(t, static_cast<long>(pf.beta)) - r.eval(t);
    dev2 = std::max(dev2, (abs(diff) / abs(pf.error_x)).to_double());
  }
  if (!(dev2 <= 1e-8)) throw IdentityCheckFailed("reconstruction", dev2);

  if (pf.m == pf.k && pf.beta == 1) {
    for (std::size_t j = 0; j < pf.c_x.size(); ++j)
      if (pf.c_x[j].sign() <= 0) throw InvariantViolated("residue " + std::to_string(j + 1) + " is not positive");
    const double dev = rel_dev(pf.c0_x.front(), pf.error_x);
    if (!(dev <= 1e-8)) throw IdentityCheckFailed("c0_equals_error", dev);
  }
}

double pf_eval(const PartialFractionForm& pf, double t) {
  double v = 0.0, tp = 1.0;
  for (double c0 : pf.c0) {
    tp *= t;
    v += c0 / tp;
  }
  for (std::size_t j = 0; j < pf.c.size(); ++j) v += pf.c[j] / (t - pf.d[j]);
  return v;
}

XScalar pf_eval(const PartialFractionForm& pf, const XScalar& t) {
  XScalar v(Precision{std::max(pf.precision_bits, t.bits())});
  XScalar tp = one(v.precision());
  for (const auto& c0 : pf.c0_x) {
    tp *= t;
    v += c0 / tp;
  }
  for (std::size_t j = 0; j < pf.c_x.size(); ++j) v += pf.c_x[j] / (t - pf.d_x[j]);
  return v;
}

double error_model(double alpha, int beta, int k) {
  const double g = beta - alpha;
  return std::pow(4.0, 1.0 + g) * std::abs(std::sin(M_PI * g)) * std::exp(-2.0 * M_PI * std::sqrt(g * k));
}

}  // namespace bura
