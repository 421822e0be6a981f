#pragma once

#include <vector>

#include "bura/xnum.hpp"

namespace bura {

enum class SeedReference { uniform, geometric_near_zero };

struct RemezConfig {
  int max_outer = 50;
  int max_inner = 25;
  /// Relative equioscillation tolerance: (max eta - min eta) / max eta.
  double delta_rel = 1e-3;
  int grid_refinements = 4;
  int grid_points_per_interval = 12;
  mpfr_prec_t precision_bits = kDefaultBits;
  /// First seeding strategy tried; the other one is the fallback.
  SeedReference seed_reference = SeedReference::uniform;
  /// Geometric seed shape.  Positive: ratio between consecutive points in t.
  /// Negative: -L places the smallest positive point at 10^-L with log t
  /// quadratic in the index.  Zero: L from the asymptotic error, halved
  /// until an alternating start is found.
  double geometric_ratio = 0.0;
  /// After delta_rel is met, keep exchanging until the spread drops below
  /// this value or stops improving.  Set to zero to stop at delta_rel.
  double polish_rel = 1e-12;
  int max_polish = 12;
};

/// r(s) = num(s) / den(s) in the shifted Chebyshev basis, den's constant
/// coefficient fixed at one.
struct ChebRational {
  ChebPoly num;
  ChebPoly den;
  XScalar eval_s(const XScalar& s) const { return cheb_eval(num, s) / cheb_eval(den, s); }
};

struct RationalApproximant {
  double alpha = 0.5;
  int beta = 1;
  int m = 0;
  int k = 0;
  ChebPoly num;
  ChebPoly den;
  XScalar error;
  /// In t, strictly increasing, first 0 and last 1 at convergence.
  std::vector<XScalar> extreme_points;
  int iterations = 0;
  mpfr_prec_t precision_bits = kDefaultBits;

  /// r(t) at full precision.
  XScalar eval(const XScalar& t) const;
  double eval(double t) const;
  /// t^(beta - alpha) - r(t).
  XScalar residual(const XScalar& t) const;
};

/// Target f(s) = ((1 + s)/2)^(beta - alpha) in the s variable.
class TargetFunction {
 public:
  TargetFunction(double alpha, int beta, Precision prec);
  XScalar operator()(const XScalar& s) const;
  const XScalar& exponent() const { return gamma_; }

 private:
  XScalar gamma_;
};

struct InitialReference {
  /// Points in s, strictly increasing, first -1 and last 1.
  std::vector<XScalar> points;
  ChebRational r0;
  XScalar level;
  SeedReference seeding = SeedReference::uniform;
};

/// Reference points for the requested seeding strategy; ratio follows
/// RemezConfig::geometric_ratio except that zero is not accepted here.
std::vector<XScalar> seed_points(SeedReference seeding, int ell, double ratio, Precision prec);

/// Builds a reference and an alternating starting approximant.  Tries the
/// configured seeding first and the other strategy second.  Throws BadReference.
InitialReference initialize_reference(double alpha, int beta, int m, int k, const RemezConfig& cfg);

struct ExtremaUpdate {
  std::vector<XScalar> points;
  /// |residual| at the new points.
  std::vector<XScalar> eta;
  XScalar global_s;
  XScalar global_eta;
  bool exchanged = false;
};

/// One exchange step: local maximizers of the residual between consecutive
/// sign changes, then the global maximizer merged by the single-point rule.
/// Throws AlternationLost.
ExtremaUpdate refine_extrema(const TargetFunction& f, const ChebRational& r, const std::vector<XScalar>& points,
                             const RemezConfig& cfg);

struct LeveledSolution {
  ChebRational r;
  /// Signed level h with f(s_i) - r(s_i) = (-1)^i h; the first point has h < 0
  /// for a well-formed reference.
  XScalar level;
  int inner_iterations = 0;
};

/// Solves the leveled interpolation system on the given points.  Newton on
/// the bilinear system starts from prev_r/prev_level when prev_r is given,
/// otherwise from one solve with the product term frozen at prev_level; the
/// frozen-level fixed point with Aitken-Steffensen acceleration is the
/// fallback.  Throws InnerDiverged or SingularMatrix.
LeveledSolution solve_leveled_system(const std::vector<XScalar>& points, const std::vector<XScalar>& f_values,
                                     const XScalar& prev_level, const ChebRational* prev_r, int m, int k,
                                     const RemezConfig& cfg);

/// Throws NonConvergence (also when no seed yields an alternating start),
/// InnerDiverged, BadParameters.
RationalApproximant compute_bura(double alpha, int beta, int m, int k, const RemezConfig& cfg = {});

/// Checks the structural invariants of a converged approximant: point count,
/// endpoints, alternation, leveling within tol_eq, positive denominator.
/// Returns an empty string on success, a description otherwise.
std::string check_approximant(const RationalApproximant& r, double tol_eq);

}  // namespace bura
