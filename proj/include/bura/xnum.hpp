#pragma once

#include <mpfr.h>

#include <complex>
#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace bura {

/// Mantissa width in bits.  Wrapped so it cannot be confused with a value.
struct Precision {
  mpfr_prec_t bits;
  explicit constexpr Precision(mpfr_prec_t b) : bits(b) {}
};

inline constexpr mpfr_prec_t kDefaultBits = 256;

/// Extended-precision real number backed by MPFR.
///
/// Binary operations are evaluated at the larger of the two operand
/// precisions and always round to nearest.
class XScalar {
 public:
  explicit XScalar(Precision p = Precision{kDefaultBits});
  XScalar(double v, Precision p);
  XScalar(long v, Precision p);
  XScalar(int v, Precision p) : XScalar(static_cast<long>(v), p) {}
  /// Parses a decimal string; throws std::invalid_argument on garbage.
  XScalar(const std::string& s, Precision p);

  XScalar(const XScalar& o);
  XScalar(XScalar&& o) noexcept;
  XScalar& operator=(const XScalar& o);
  XScalar& operator=(XScalar&& o) noexcept;
  ~XScalar();

  mpfr_prec_t bits() const { return mpfr_get_prec(v_); }
  Precision precision() const { return Precision{bits()}; }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  /// Scientific notation with the given number of significant digits;
  /// digits == 0 picks bits/3 + 2 which reloads losslessly.
  std::string to_string(int digits = 0) const;

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  XScalar& operator+=(const XScalar& o);
  XScalar& operator-=(const XScalar& o);
  XScalar& operator*=(const XScalar& o);
  XScalar& operator/=(const XScalar& o);
  XScalar& operator*=(long o);
  XScalar& operator/=(long o);

  friend XScalar operator-(const XScalar& a);
  friend XScalar operator+(const XScalar& a, const XScalar& b);
  friend XScalar operator-(const XScalar& a, const XScalar& b);
  friend XScalar operator*(const XScalar& a, const XScalar& b);
  friend XScalar operator/(const XScalar& a, const XScalar& b);

  friend int cmp(const XScalar& a, const XScalar& b) { return mpfr_cmp(a.v_, b.v_); }
  friend bool operator<(const XScalar& a, const XScalar& b) { return cmp(a, b) < 0; }
  friend bool operator>(const XScalar& a, const XScalar& b) { return cmp(a, b) > 0; }
  friend bool operator<=(const XScalar& a, const XScalar& b) { return cmp(a, b) <= 0; }
  friend bool operator>=(const XScalar& a, const XScalar& b) { return cmp(a, b) >= 0; }
  friend bool operator==(const XScalar& a, const XScalar& b) { return cmp(a, b) == 0; }

 private:
  mpfr_t v_;
};

XScalar abs(const XScalar& x);
XScalar sqrt(const XScalar& x);
XScalar pow(const XScalar& x, const XScalar& y);
XScalar pow(const XScalar& x, long n);
XScalar exp(const XScalar& x);
XScalar log(const XScalar& x);
XScalar const_pi(Precision p);
/// 2^e at precision p.
XScalar ldexp_one(long e, Precision p);
inline const XScalar& max_abs_ref(const XScalar& a, const XScalar& b) {
  return mpfr_cmpabs(a.raw(), b.raw()) >= 0 ? a : b;
}

/// Converts a double through its shortest round-tripping decimal form, so
/// 0.1 becomes the exact decimal one tenth rather than the nearest binary64.
XScalar from_decimal_double(double v, Precision p);

std::ostream& operator<<(std::ostream& os, const XScalar& x);

/// Polynomial in the shifted Chebyshev basis: sum_j coeffs[j] * T_j(s), s = 2t - 1.
struct ChebPoly {
  std::vector<XScalar> coeffs;
  /// True when the highest coefficient is allowed to vanish.
  bool padded = false;

  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  Precision precision() const { return coeffs.empty() ? Precision{kDefaultBits} : coeffs.front().precision(); }
};

/// Clenshaw recurrence; defined for every s, meaningful on [-1, 1].
XScalar cheb_eval(const ChebPoly& p, const XScalar& s);
/// Derivative with respect to s, in the same basis (degree drops by one).
ChebPoly cheb_derivative(const ChebPoly& p);

/// Monomial coefficients in t (ascending powers) to the shifted Chebyshev basis.
ChebPoly monomial_to_cheb(const std::vector<XScalar>& mono);
/// Inverse of monomial_to_cheb.
std::vector<XScalar> cheb_to_monomial(const ChebPoly& p);
/// Horner evaluation of ascending monomial coefficients.
XScalar monomial_eval(const std::vector<XScalar>& mono, const XScalar& t);

using XMatrix = std::vector<std::vector<XScalar>>;

struct DenseSolveOptions {
  std::size_t cap = 64;
  /// Pivot threshold exponent e: a pivot below 2^(-e) * max|M_ij| is rejected.
  /// Zero selects bits/2.
  long pivot_exponent = 0;
};

/// Gaussian elimination with partial pivoting.  Throws SingularMatrix.
std::vector<XScalar> dense_solve(XMatrix M, std::vector<XScalar> b, const DenseSolveOptions& opt = {});

/// Complex number with extended-precision parts.
struct XComplex {
  XScalar re;
  XScalar im;
};

/// All roots of q, returned in the t variable, sorted by real part descending.
/// Initial estimates come from the colleague matrix in double precision; each
/// root is then polished at full precision.  Throws RootPolishDiverged.
std::vector<XComplex> poly_roots(const ChebPoly& q);

}  // namespace bura
