#pragma once

#include <vector>

#include "bura/remez.hpp"
#include "bura/xnum.hpp"

namespace bura {

/// r(t) = lead * prod (t - zeros[j]) / prod (t - poles[j]).
struct ZeroPoleSet {
  /// Roots of the numerator, in t, decreasing.
  std::vector<XScalar> zeros;
  /// Roots of the denominator, in t, decreasing.
  std::vector<XScalar> poles;
  XScalar lead;

  std::vector<double> zeros_d() const;
  std::vector<double> poles_d() const;
};

/// t^-beta r(t) = sum_j c0[j-1] / t^j + sum_j c[j] / (t - d[j]).
/// Every coefficient is kept at full precision (the *_x fields) and as a
/// binary64 export used by the solvers.
struct PartialFractionForm {
  double alpha = 0.5;
  int beta = 1;
  int m = 0;
  int k = 0;
  mpfr_prec_t precision_bits = kDefaultBits;

  std::vector<XScalar> c0_x;
  std::vector<XScalar> c_x;
  std::vector<XScalar> d_x;
  XScalar error_x;

  std::vector<double> c0;
  std::vector<double> c;
  std::vector<double> d;
  double error = 0.0;
};

/// Roots of numerator and denominator.  Throws ComplexPolesDetected when a
/// root is not real within 2^(-bits/2) * max(1, |z|), InterlacingViolated when
/// a pole is not negative, poles are not strictly decreasing, or (for m = k,
/// beta = 1) zeros and poles fail to interlace.
ZeroPoleSet extract_zeros_poles(const RationalApproximant& r);

/// Residues from P(d_j) / Q'(d_j) and the inverse-power coefficients from the
/// polynomial part.  Needs real poles only (ComplexPolesDetected otherwise).  Validates the form before returning: throws
/// IdentityCheckFailed for the c0_beta, sum or reconstruction identity, InvariantViolated for
/// sign or simple-pole failures.
PartialFractionForm to_partial_fractions(const RationalApproximant& r);

/// Re-checks the invariants of a form (used after cache reloads).  Throws as
/// to_partial_fractions does.
void validate_partial_fractions(const PartialFractionForm& pf, const RationalApproximant& r);

double pf_eval(const PartialFractionForm& pf, double t);
XScalar pf_eval(const PartialFractionForm& pf, const XScalar& t);

/// lead * prod (t - zeta) / prod (t - d) at full precision.
XScalar product_eval(const ZeroPoleSet& zp, const XScalar& t);

/// Asymptotic BURA error 4^(1+g) |sin(pi g)| exp(-2 pi sqrt(g k)), g = beta - alpha.
double error_model(double alpha, int beta, int k);

}  // namespace bura
