#include "bura/remez.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "bura/decomp.hpp"
#include "bura/errors.hpp"

namespace bura {

namespace {

XScalar one(Precision p) { return XScalar(1L, p); }

XScalar s_to_t(const XScalar& s) {
  XScalar t = s + one(s.precision());
  t /= 2L;
  return t;
}

XScalar t_to_s(const XScalar& t) {
  XScalar s = t;
  s *= 2L;
  s -= one(t.precision());
  return s;
}

// T_0(s) .. T_n(s).
std::vector<XScalar> cheb_values(const XScalar& s, std::size_t n) {
  std::vector<XScalar> T;
  T.reserve(n + 1);
  T.push_back(one(s.precision()));
  if (n >= 1) T.push_back(s);
  for (std::size_t j = 2; j <= n; ++j) {
    XScalar v = s * T[j - 1];
    v *= 2L;
    v -= T[j - 2];
    T.push_back(std::move(v));
  }
  return T;
}

void validate_degrees(double alpha, int beta, int m, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw BadParameters("alpha must lie in (0,1)");
  if (beta < 1) throw BadParameters("beta must be at least 1");
  if (m < 0 || k < 0) throw BadParameters("degrees must be nonnegative");
  if (m >= k + beta) throw BadParameters("numerator degree must satisfy m < k + beta");
  if (m + k + 2 > 64) throw BadParameters("m + k + 2 exceeds the dense solve cap");
}

void validate_config(const RemezConfig& cfg) {
  if (cfg.max_outer <= 0 || cfg.max_inner <= 0 || cfg.grid_refinements <= 0 || cfg.grid_points_per_interval < 3)
    throw BadParameters("Remez counts must be positive (and at least 3 grid points)");
  if (!(cfg.delta_rel > 0.0 && cfg.delta_rel < 1.0)) throw BadParameters("delta_rel must lie in (0,1)");
  if (cfg.precision_bits < 53) throw BadParameters("precision must be at least 53 bits");
}

// Residual e(s) = f(s) - r(s).  Throws AlternationLost when the denominator
// is not positive, since the residual then has a pole in the interval.
XScalar residual_s(const TargetFunction& f, const ChebRational& r, const XScalar& s) {
  XScalar q = cheb_eval(r.den, s);
  if (q.sign() <= 0) throw AlternationLost("denominator is not positive at s = " + std::to_string(s.to_double()));
  return f(s) - cheb_eval(r.num, s) / q;
}

// Maximizes sgn * e(s) over [lo, hi] by iterated grid refinement.
std::pair<XScalar, XScalar> grid_maximize(const TargetFunction& f, const ChebRational& r, int sgn, XScalar lo,
                                          XScalar hi, const RemezConfig& cfg) {
  const Precision prec = lo.precision();
  const int G = cfg.grid_points_per_interval;
  const XScalar a0 = lo, b0 = hi;
  XScalar best_s = lo;
  XScalar best_v = residual_s(f, r, lo);
  if (sgn < 0) best_v = -best_v;
  for (int round = 0; round < cfg.grid_refinements; ++round) {
    XScalar step = hi - lo;
    step /= static_cast<long>(G - 1);
    for (int g = 0; g < G; ++g) {
      XScalar s = lo + step * XScalar(static_cast<long>(g), prec);
      if (g == G - 1) s = hi;
      XScalar v = residual_s(f, r, s);
      if (sgn < 0) v = -v;
      if (v > best_v) {
        best_v = std::move(v);
        best_s = std::move(s);
      }
    }
    // Shrink the window by ten around the incumbent.
    XScalar half = hi - lo;
    half /= 20L;
    lo = best_s - half;
    hi = best_s + half;
    if (lo < a0) lo = a0;
    if (hi > b0) hi = b0;
  }
  return {best_s, best_v};
}

// Bisection for the sign change of e between a and b (e(a) has sign sa).
XScalar find_zero(const TargetFunction& f, const ChebRational& r, XScalar a, XScalar b, int sa) {
  for (int it = 0; it < 48; ++it) {
    XScalar mid = a + b;
    mid /= 2L;
    if (mid <= a || mid >= b) break;
    XScalar v = residual_s(f, r, mid);
    if (v.sign() == sa)
      a = std::move(mid);
    else
      b = std::move(mid);
  }
  XScalar z = a + b;
  z /= 2L;
  return z;
}

bool denominator_positive_on_interval(const ChebPoly& den) {
  const Precision prec = den.precision();
  // Cheap grid check first; cluster half the samples near t = 0.
  for (int i = 0; i <= 1000; ++i) {
    double t = i < 500 ? std::pow(10.0, -16.0 + 16.0 * i / 500.0) : (i - 500) / 500.0;
    if (i == 0) t = 0.0;
    if (cheb_eval(den, t_to_s(XScalar(t, prec))).sign() <= 0) return false;
  }
  if (den.degree() == 0) return true;
  try {
    ChebPoly trimmed = den;
    while (trimmed.coeffs.size() > 1 && trimmed.coeffs.back().is_zero()) trimmed.coeffs.pop_back();
    if (trimmed.degree() == 0) return true;
    for (const auto& z : poly_roots(trimmed)) {
      double re = z.re.to_double(), im = z.im.to_double();
      if (std::abs(im) <= 1e-12 * (1.0 + std::abs(re)) && re >= 0.0 && re <= 1.0) return false;
    }
  } catch (const RootPolishDiverged&) {
    return false;
  }
  return true;
}

bool residual_alternates(const TargetFunction& f, const ChebRational& r, const std::vector<XScalar>& pts) {
  int prev = 0;
  for (const auto& s : pts) {
    int sg;
    try {
      sg = residual_s(f, r, s).sign();
    } catch (const AlternationLost&) {
      return false;
    }
    if (sg == 0 || sg == prev) return false;
    prev = sg;
  }
  return true;
}

// -log10 of the smallest positive point of the geometric seed: the first
// interior extreme point sits near E^(1/gamma).
double auto_seed_depth(double alpha, int beta, int k) {
  const double model = error_model(alpha, beta, std::max(k, 1));
  return std::max(1.0, -std::log10(model) / (beta - alpha) - 1.0);
}

}  // namespace

TargetFunction::TargetFunction(double alpha, int beta, Precision prec)
    : gamma_(XScalar(static_cast<long>(beta), prec) - from_decimal_double(alpha, prec)) {}

XScalar TargetFunction::operator()(const XScalar& s) const {
  XScalar t = s_to_t(s);
  if (t.sign() <= 0) return XScalar(t.precision());
  return pow(t, gamma_);
}

XScalar RationalApproximant::eval(const XScalar& t) const {
  XScalar s = t_to_s(t);
  return cheb_eval(num, s) / cheb_eval(den, s);
}

double RationalApproximant::eval(double t) const { return eval(XScalar(t, Precision{precision_bits})).to_double(); }

XScalar RationalApproximant::residual(const XScalar& t) const {
  TargetFunction f(alpha, beta, Precision{std::max(precision_bits, t.bits())});
  return f(t_to_s(t)) - eval(t);
}

std::vector<XScalar> seed_points(SeedReference seeding, int ell, double ratio, Precision prec) {
  std::vector<XScalar> pts;
  pts.reserve(static_cast<std::size_t>(ell));
  if (ell < 2) throw BadParameters("reference needs at least two points");
  if (seeding == SeedReference::uniform) {
    for (int i = 0; i < ell; ++i) {
      XScalar s(static_cast<long>(2 * i), prec);
      s /= static_cast<long>(ell - 1);
      s -= one(prec);
      pts.push_back(std::move(s));
    }
  } else if (ratio == 0.0) {
    throw BadParameters("geometric seed needs a nonzero ratio");
  } else if (ratio > 0.0) {
    // t_0 = 0, t_i = ratio^-(ell-1-i).
    XScalar rho = from_decimal_double(ratio, prec);
    pts.push_back(-one(prec));
    for (int i = 1; i < ell; ++i) pts.push_back(t_to_s(pow(rho, -static_cast<long>(ell - 1 - i))));
  } else {
    // ratio < 0 encodes -log10 of the smallest positive point; spacing in log t is quadratic.
    const double L = -ratio;
    pts.push_back(-one(prec));
    for (int i = 1; i < ell; ++i) {
      double x = ell > 2 ? static_cast<double>(ell - 1 - i) / (ell - 2) : 0.0;
      pts.push_back(t_to_s(XScalar(std::pow(10.0, -L * x * x), prec)));
    }
  }
  return pts;
}

LeveledSolution solve_leveled_system(const std::vector<XScalar>& points, const std::vector<XScalar>& f_values,
                                     const XScalar& prev_level, const ChebRational* prev_r, int m, int k,
                                     const RemezConfig& cfg) {
  const std::size_t ell = points.size();
  if (ell != static_cast<std::size_t>(m + k + 2) || f_values.size() != ell)
    throw BadParameters("leveled system: expected m + k + 2 points");
  const Precision prec{cfg.precision_bits};
  const std::size_t nT = static_cast<std::size_t>(std::max(m, k));
  std::vector<std::vector<XScalar>> T;
  T.reserve(ell);
  for (const auto& s : points) T.push_back(cheb_values(s, nT));

  DenseSolveOptions solve_opts;
  solve_opts.pivot_exponent = static_cast<long>(cfg.precision_bits) - 8;

  auto to_rational = [&](const std::vector<XScalar>& x, ChebRational* out) {
    out->num.coeffs.assign(x.begin(), x.begin() + (m + 1));
    out->num.padded = true;
    out->den.coeffs.clear();
    out->den.coeffs.push_back(one(prec));
    for (int j = 1; j <= k; ++j) out->den.coeffs.push_back(x[static_cast<std::size_t>(m + j)]);
    out->den.padded = true;
  };

  // Linearized system with the product term frozen at h_in.
  auto solve_frozen = [&](const XScalar& h_in) {
    XMatrix M(ell, std::vector<XScalar>(ell, XScalar(prec)));
    std::vector<XScalar> rhs(ell, XScalar(prec));
    for (std::size_t i = 0; i < ell; ++i) {
      const bool odd = (i % 2) == 1;
      XScalar coef = f_values[i];
      if (odd)
        coef += h_in;
      else
        coef -= h_in;
      for (int j = 0; j <= m; ++j) M[i][static_cast<std::size_t>(j)] = T[i][static_cast<std::size_t>(j)];
      for (int j = 1; j <= k; ++j) M[i][static_cast<std::size_t>(m + j)] = -(coef * T[i][static_cast<std::size_t>(j)]);
      M[i][ell - 1] = odd ? -one(prec) : one(prec);
      rhs[i] = f_values[i];
    }
    return dense_solve(std::move(M), std::move(rhs), solve_opts);
  };

  auto g = [&](const XScalar& h_in, ChebRational* out) {
    std::vector<XScalar> x = solve_frozen(h_in);
    if (out) to_rational(x, out);
    return x[ell - 1];
  };

  // Newton step on the bilinear system P_i - (f_i - sigma_i E) S_i + sigma_i E = f_i.
  auto newton_step = [&](std::vector<XScalar>& x) {
    XMatrix J(ell, std::vector<XScalar>(ell, XScalar(prec)));
    std::vector<XScalar> F(ell, XScalar(prec));
    const XScalar& E = x[ell - 1];
    for (std::size_t i = 0; i < ell; ++i) {
      const bool odd = (i % 2) == 1;
      XScalar P(prec), S(prec);
      for (int j = 0; j <= m; ++j) P += x[static_cast<std::size_t>(j)] * T[i][static_cast<std::size_t>(j)];
      for (int j = 1; j <= k; ++j) S += x[static_cast<std::size_t>(m + j)] * T[i][static_cast<std::size_t>(j)];
      XScalar coef = f_values[i];
      XScalar Q = S + one(prec);
      if (odd) {
        coef += E;
        Q = -Q;
      } else {
        coef -= E;
      }
      // F_i = P - coef*S + sigma*E - f
      XScalar Fi = P - coef * S;
      if (odd)
        Fi -= E;
      else
        Fi += E;
      Fi -= f_values[i];
      F[i] = -Fi;
      for (int j = 0; j <= m; ++j) J[i][static_cast<std::size_t>(j)] = T[i][static_cast<std::size_t>(j)];
      for (int j = 1; j <= k; ++j) J[i][static_cast<std::size_t>(m + j)] = -(coef * T[i][static_cast<std::size_t>(j)]);
      J[i][ell - 1] = std::move(Q);
    }
    std::vector<XScalar> dx = dense_solve(std::move(J), std::move(F), solve_opts);
    for (std::size_t i = 0; i < ell; ++i) x[i] += dx[i];
    return abs(dx[ell - 1]);
  };

  const XScalar eps = ldexp_one(-static_cast<long>(cfg.precision_bits / 2), prec);
  auto close = [&](const XScalar& a, const XScalar& b) {
    XScalar tol = eps * abs(max_abs_ref(a, b));
    return abs(a - b) <= tol || (a.is_zero() && b.is_zero());
  };

  // Q must stay positive on the reference; the bilinear system has other
  // roots where it does not.
  auto den_positive = [&](const std::vector<XScalar>& x) {
    for (std::size_t i = 0; i < ell; ++i) {
      XScalar Q = one(prec);
      for (int j = 1; j <= k; ++j) Q += x[static_cast<std::size_t>(m + j)] * T[i][static_cast<std::size_t>(j)];
      if (Q.sign() <= 0) return false;
    }
    return true;
  };

  // Newton on the bilinear system.  Its E column is sigma_i Q(s_i), which
  // keeps the level well determined even where Q is tiny; stagnation at the
  // rounding floor counts as converged.
  auto newton = [&](std::vector<XScalar> x, int used, LeveledSolution* out) {
    std::optional<XScalar> last_step;
    bool ok = false;
    while (used < cfg.max_inner) {
      XScalar step = newton_step(x);
      ++used;
      if (!x[ell - 1].is_finite()) break;
      if (step <= eps * abs(x[ell - 1])) {
        ok = true;
        break;
      }
      if (last_step && used > 3 && step >= *last_step) {
        ok = step <= abs(x[ell - 1]) * ldexp_one(-8, prec);
        break;
      }
      last_step = step;
    }
    if (!ok || !den_positive(x)) return false;
    to_rational(x, &out->r);
    out->level = x[ell - 1];
    out->inner_iterations = used;
    return true;
  };

  LeveledSolution sol;
  // First start: one solve with the product term frozen at prev_level.
  try {
    if (newton(solve_frozen(prev_level), 1, &sol)) return sol;
  } catch (const SingularMatrix&) {
  }
  // Second start: the previous outer iterate, when its shape matches.
  if (prev_r && prev_r->num.coeffs.size() == static_cast<std::size_t>(m + 1) &&
      prev_r->den.coeffs.size() == static_cast<std::size_t>(k + 1)) {
    std::vector<XScalar> x(prev_r->num.coeffs.begin(), prev_r->num.coeffs.end());
    x.insert(x.end(), prev_r->den.coeffs.begin() + 1, prev_r->den.coeffs.end());
    x.push_back(prev_level);
    try {
      if (newton(std::move(x), 0, &sol)) return sol;
    } catch (const SingularMatrix&) {
    }
  }
  // Strategy 0: Aitken-Steffensen; 1: plain fixed point; 2: damped fixed point.
  // The map is close to h -> h + c with slope near one, so the accelerated
  // strategy judges convergence by the extrapolated step, not by g(h) - h.
  for (int strategy = 0; strategy < 3; ++strategy) {
    XScalar x = prev_level;
    int used = 0;
    bool ok = false;
    try {
      while (used < cfg.max_inner) {
        XScalar x1 = g(x, nullptr);
        ++used;
        if (strategy == 0) {
          if (used >= cfg.max_inner) break;
          XScalar x2 = g(x1, nullptr);
          ++used;
          XScalar d1 = x2 - x1, d0 = x1 - x;
          XScalar den = d1 - d0;
          XScalar acc = x2;
          if (!den.is_zero() && den.is_finite()) acc = x2 - d1 * d1 / den;
          if (!acc.is_finite()) break;
          if (close(acc, x)) {
            x = std::move(acc);
            ok = true;
            break;
          }
          x = std::move(acc);
          continue;
        }
        if (close(x1, x)) {
          x = std::move(x1);
          ok = true;
          break;
        }
        if (strategy == 1) {
          x = std::move(x1);
        } else {
          XScalar mid = x + x1;
          mid /= 2L;
          x = std::move(mid);
        }
        if (!x.is_finite()) break;
      }
    } catch (const SingularMatrix&) {
      if (strategy == 2) throw;
      continue;
    }
    if (!ok) continue;
    // One final solve with the converged level to get consistent coefficients.
    sol.level = g(x, &sol.r);
    sol.inner_iterations = used + 1;
    return sol;
  }
  throw InnerDiverged("leveled system fixed point did not settle in " + std::to_string(cfg.max_inner) +
                      " iterations with any strategy");
}

InitialReference initialize_reference(double alpha, int beta, int m, int k, const RemezConfig& cfg) {
  validate_degrees(alpha, beta, m, k);
  validate_config(cfg);
  const Precision prec{cfg.precision_bits};
  const int ell = m + k + 2;
  TargetFunction f(alpha, beta, prec);
  const SeedReference order[2] = {cfg.seed_reference, cfg.seed_reference == SeedReference::uniform
                                                          ? SeedReference::geometric_near_zero
                                                          : SeedReference::uniform};
  std::string why;
  auto attempt = [&](SeedReference seeding, double ratio, InitialReference* ref) {
    const char* tag = seeding == SeedReference::uniform ? "uniform: " : "geometric: ";
    ref->seeding = seeding;
    ref->points = seed_points(seeding, ell, ratio, prec);
    std::vector<XScalar> fv;
    for (const auto& s : ref->points) fv.push_back(f(s));
    try {
      LeveledSolution sol = solve_leveled_system(ref->points, fv, XScalar(prec), nullptr, m, k, cfg);
      ref->r0 = std::move(sol.r);
      ref->level = std::move(sol.level);
    } catch (const Error& e) {
      why += std::string(tag) + e.what() + "; ";
      return false;
    }
    if (!denominator_positive_on_interval(ref->r0.den)) {
      why += std::string(tag) + "denominator vanishes; ";
      return false;
    }
    if (!residual_alternates(f, ref->r0, ref->points)) {
      why += std::string(tag) + "no alternation; ";
      return false;
    }
    return true;
  };
  for (SeedReference seeding : order) {
    InitialReference ref;
    if (seeding == SeedReference::uniform || cfg.geometric_ratio != 0.0) {
      if (attempt(seeding, cfg.geometric_ratio, &ref)) return ref;
      continue;
    }
    // Depth anchored on the asymptotic error: the smallest positive extreme
    // point sits near E^(1/gamma).  Shallower references are better
    // conditioned, so halve the depth until one works.
    for (double depth = auto_seed_depth(alpha, beta, k); depth >= 1.0; depth /= 2.0)
      if (attempt(seeding, -depth, &ref)) return ref;
  }
  throw BadReference("no alternating initial approximant: " + why);
}

ExtremaUpdate refine_extrema(const TargetFunction& f, const ChebRational& r, const std::vector<XScalar>& points,
                             const RemezConfig& cfg) {
  const std::size_t ell = points.size();
  const Precision prec{cfg.precision_bits};
  std::vector<int> sg(ell);
  for (std::size_t i = 0; i < ell; ++i) {
    sg[i] = residual_s(f, r, points[i]).sign();
    if (sg[i] == 0 || (i > 0 && sg[i] == sg[i - 1]))
      throw AlternationLost("residual does not alternate at reference point " + std::to_string(i));
  }
  std::vector<XScalar> zeros;
  zeros.reserve(ell + 1);
  zeros.push_back(-one(prec));
  for (std::size_t i = 0; i + 1 < ell; ++i) zeros.push_back(find_zero(f, r, points[i], points[i + 1], sg[i]));
  zeros.push_back(one(prec));

  ExtremaUpdate up;
  up.points.reserve(ell);
  up.eta.reserve(ell);
  std::optional<std::pair<XScalar, XScalar>> opposite;  // (s, |e|) of the worst wrong-signed value
  for (std::size_t i = 0; i < ell; ++i) {
    auto [s, v] = grid_maximize(f, r, sg[i], zeros[i], zeros[i + 1], cfg);
    if (v.sign() <= 0) throw AlternationLost("no extremum of the expected sign in bracket " + std::to_string(i));
    up.points.push_back(std::move(s));
    up.eta.push_back(std::move(v));
    // A sign flip inside the bracket means the residual overshoots there.
    auto [so, vo] = grid_maximize(f, r, -sg[i], zeros[i], zeros[i + 1], cfg);
    if (vo.sign() > 0 && (!opposite || vo > opposite->second)) opposite = std::make_pair(std::move(so), std::move(vo));
  }
  for (std::size_t i = 1; i < ell; ++i)
    if (!(up.points[i] > up.points[i - 1])) throw AlternationLost("refined points are not strictly increasing");

  std::size_t imax = 0;
  for (std::size_t i = 1; i < ell; ++i)
    if (up.eta[i] > up.eta[imax]) imax = i;
  up.global_s = up.points[imax];
  up.global_eta = up.eta[imax];

  if (opposite && opposite->second > up.global_eta) {
    const XScalar& s_star = opposite->first;
    up.global_s = s_star;
    up.global_eta = opposite->second;
    const XScalar tie = ldexp_one(-static_cast<long>(cfg.precision_bits / 2), prec);
    bool coincides = false;
    for (const auto& p : up.points)
      if (abs(p - s_star) <= tie) coincides = true;
    if (!coincides) {
      const int sstar = residual_s(f, r, s_star).sign();
      // Locate s* between new points j and j+1 and drop the same-signed neighbour.
      std::size_t j = 0;
      while (j < ell && up.points[j] < s_star) ++j;
      // Now points[j-1] < s* < points[j] (with j = 0 or ell at the ends).
      auto new_sign = [&](std::size_t i) { return sg[i]; };
      std::size_t replace;
      if (j == 0) {
        replace = (new_sign(0) == sstar) ? 0 : ell;  // ell marks shift-out of the last point
      } else if (j == ell) {
        replace = (new_sign(ell - 1) == sstar) ? ell - 1 : ell + 1;  // ell+1 marks shift-out of the first
      } else {
        replace = (new_sign(j - 1) == sstar) ? j - 1 : j;
      }
      XScalar eta_star = opposite->second;
      if (replace < ell) {
        up.points[replace] = s_star;
        up.eta[replace] = eta_star;
        // Signs follow from position; the swap keeps alternation by construction.
      } else if (replace == ell) {
        up.points.insert(up.points.begin(), s_star);
        up.eta.insert(up.eta.begin(), eta_star);
        up.points.pop_back();
        up.eta.pop_back();
      } else {
        up.points.push_back(s_star);
        up.eta.push_back(eta_star);
        up.points.erase(up.points.begin());
        up.eta.erase(up.eta.begin());
      }
      up.exchanged = true;
    }
  }
  // Final alternation audit of the merged set.
  int prev = 0;
  for (const auto& p : up.points) {
    int s = residual_s(f, r, p).sign();
    if (s == 0 || s == prev) throw AlternationLost("exchange broke sign alternation");
    prev = s;
  }
  return up;
}

namespace {

double relative_spread(const std::vector<XScalar>& eta) {
  XScalar lo = eta.front(), hi = eta.front();
  for (const auto& e : eta) {
    if (e < lo) lo = e;
    if (e > hi) hi = e;
  }
  return ((hi - lo) / hi).to_double();
}

}  // namespace

RationalApproximant compute_bura(double alpha, int beta, int m, int k, const RemezConfig& cfg) {
  validate_degrees(alpha, beta, m, k);
  validate_config(cfg);
  // With valid parameters every seed fails only when the working precision
  // cannot resolve the leveled system, which is the same symptom as an
  // exhausted outer loop.
  InitialReference ref;
  try {
    ref = initialize_reference(alpha, beta, m, k, cfg);
  } catch (const BadReference& e) {
    throw NonConvergence(0, 1.0, e.what());
  }
  const Precision prec{cfg.precision_bits};
  TargetFunction f(alpha, beta, prec);

  std::vector<XScalar> points = ref.points;
  ChebRational r = ref.r0;
  XScalar level = ref.level;

  struct Snapshot {
    ChebRational r;
    XScalar level;
    std::vector<XScalar> points;
    double spread;
    int iteration;
  };
  std::optional<Snapshot> converged;
  double last_spread = 1.0;
  int polish = 0;

  auto finish = [&](const Snapshot& snap) {
    RationalApproximant out;
    out.alpha = alpha;
    out.beta = beta;
    out.m = m;
    out.k = k;
    out.num = snap.r.num;
    out.den = snap.r.den;
    out.error = abs(snap.level);
    for (const auto& s : snap.points) out.extreme_points.push_back(s_to_t(s));
    out.iterations = snap.iteration;
    out.precision_bits = cfg.precision_bits;
    return out;
  };

  for (int it = 1; it <= cfg.max_outer + cfg.max_polish; ++it) {
    ExtremaUpdate up;
    try {
      up = refine_extrema(f, r, points, cfg);
    } catch (const AlternationLost& e) {
      if (converged) return finish(*converged);
      throw NonConvergence(it, last_spread, e.what());
    }
    double spread = relative_spread(up.eta);
    if (up.global_eta > *std::max_element(up.eta.begin(), up.eta.end()))
      spread = std::max(spread, ((up.global_eta - level) / up.global_eta).to_double());
    last_spread = spread;

    if (!up.exchanged && spread <= cfg.delta_rel) {
      Snapshot snap{r, level, up.points, spread, it};
      if (converged && spread >= converged->spread) return finish(*converged);  // precision floor reached
      converged = std::move(snap);
      if (spread <= cfg.polish_rel || polish >= cfg.max_polish) return finish(*converged);
      ++polish;
    } else if (converged) {
      return finish(*converged);
    } else if (it >= cfg.max_outer) {
      throw NonConvergence(it, spread, "");
    }

    points = std::move(up.points);
    std::vector<XScalar> fv;
    fv.reserve(points.size());
    for (const auto& s : points) fv.push_back(f(s));
    try {
      LeveledSolution sol = solve_leveled_system(points, fv, level, &r, m, k, cfg);
      r = std::move(sol.r);
      level = std::move(sol.level);
    } catch (const SingularMatrix& e) {
      if (converged) return finish(*converged);
      throw NonConvergence(it, spread, e.what());
    } catch (const InnerDiverged&) {
      if (converged) return finish(*converged);
      throw;
    }
  }
  if (converged) return finish(*converged);
  throw NonConvergence(cfg.max_outer, last_spread, "");
}

std::string check_approximant(const RationalApproximant& r, double tol_eq) {
  const std::size_t ell = static_cast<std::size_t>(r.m + r.k + 2);
  const Precision prec{r.precision_bits};
  if (r.extreme_points.size() != ell) return "wrong number of extreme points";
  if (!r.extreme_points.front().is_zero()) return "first extreme point is not 0";
  if (!(r.extreme_points.back() == one(prec))) return "last extreme point is not 1";
  for (std::size_t i = 1; i < ell; ++i)
    if (!(r.extreme_points[i] > r.extreme_points[i - 1])) return "extreme points not increasing";
  if (r.den.coeffs.empty() || !(r.den.coeffs[0] == one(prec))) return "denominator not normalized";
  if (!denominator_positive_on_interval(r.den)) return "denominator has a root in [0,1]";
  const XScalar lo = r.error * XScalar(1.0 - tol_eq, prec);
  const XScalar hi = r.error * XScalar(1.0 + tol_eq, prec);
  int prev = 0;
  for (std::size_t i = 0; i < ell; ++i) {
    XScalar e = r.residual(r.extreme_points[i]);
    int sg = e.sign();
    if (sg == 0 || sg == prev) return "residual does not alternate at point " + std::to_string(i);
    prev = sg;
    XScalar a = abs(e);
    if (a < lo || a > hi)
      return "residual magnitude at point " + std::to_string(i) + " is off the level by " +
             std::to_string(((a - r.error) / r.error).to_double());
  }
  return {};
}

}  // namespace bura
