#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bura/decomp.hpp"
#include "bura/kernels.hpp"
#include "bura/operators.hpp"

namespace bura {

enum class SolveMethod { thomas, cg, pcg_jacobi, pcg_ic0 };

const char* to_string(SolveMethod m);
/// Accepts the names printed by to_string; throws BadParameters otherwise.
SolveMethod parse_method(const std::string& name);

struct SolveConfig {
  SolveMethod method = SolveMethod::cg;
  double rel_tol = 1e-12;
  /// 0 selects 10 n.
  std::int64_t max_iter = 0;
  bool record_history = false;
  /// Kernel execution for the Krylov loops.
  Exec exec = Exec::parallel;
  /// Run the independent shifted systems of one application concurrently.
  bool concurrent_systems = true;
};

struct SystemStats {
  double shift = 0.0;
  int iterations = 0;
  /// ||(A - shift I) x - b|| / ||b||, recomputed from x.
  double rel_residual = 0.0;
  std::vector<double> history;
};

struct FracSolveReport {
  std::vector<double> u_r;
  std::vector<SystemStats> per_system;
  double wall_time = 0.0;
  double alpha = 0.0;
  int beta = 1;
  int m = 0;
  int k = 0;
  std::uint64_t seed = 0;
  double rel_tol = 0.0;
  SolveMethod method = SolveMethod::cg;
};

/// x = (A - shift I)^-1 b for shift <= 0.  Krylov methods stop when the
/// recursively updated residual drops below rel_tol ||b||.  Throws
/// MaxIterExceeded, MethodMismatch (thomas on a non-tridiagonal matrix) and
/// BadParameters (positive shift, bad tolerance, size mismatch).
std::vector<double> shifted_solve(const SparseSpdOperator& A, double shift, const std::vector<double>& b,
                                  const SolveConfig& cfg, SystemStats* stats = nullptr);

/// u_r = sum_i c0_i A^-i f + sum_j c_j (A - d_j I)^-1 f.  The inverse powers
/// are repeated solves; terms are added c0 first, then c, each ascending.
FracSolveReport bura_apply(const PartialFractionForm& pf, const SparseSpdOperator& A, const std::vector<double>& f,
                           const SolveConfig& cfg);

/// Approximates AA^-alpha f~ for the unnormalized AA = scale * A:
/// scale^-alpha times bura_apply on f~.
FracSolveReport bura_apply_unnormalized(const PartialFractionForm& pf, const SparseSpdOperator& A,
                                        const std::vector<double>& f_tilde, const SolveConfig& cfg);

/// beta = 1 product form lead * prod_j (A - zeta_j I)(A - d_j I)^-1 A^-1 f,
/// one factor at a time in ascending j.  Poles beyond the zeros (m < k)
/// contribute bare (A - d_j I)^-1 factors.
FracSolveReport bura_apply_product(const ZeroPoleSet& zp, const SparseSpdOperator& A, const std::vector<double>& f,
                                   const SolveConfig& cfg);

/// u_i = bura_apply(pfs[i], A, u_{i-1}) starting from f.  Every form must
/// have beta = 1 and their alphas must sum to target_alpha within 1e-12.
FracSolveReport multi_step_apply(const std::vector<PartialFractionForm>& pfs, double target_alpha,
                                 const SparseSpdOperator& A, const std::vector<double>& f, const SolveConfig& cfg);

struct QuadratureResult {
  std::vector<double> u;
  int system_count = 0;
  int m = 0;
  int M = 0;
  std::vector<SystemStats> per_system;
};

/// Sinc quadrature for AA^-alpha f with AA = A.scale * A:
///   (2k' sin(pi alpha)/pi) sum_{l=-m..M} e^{2(alpha-1) l k'} (e^{-2 l k'} I + AA)^-1 f
/// with m = ceil(pi^2/(4 alpha k'^2)), M = ceil(pi^2/(4 (1-alpha) k'^2)).
QuadratureResult quadrature_apply(const SparseSpdOperator& A, const std::vector<double>& f, double alpha,
                                  double kprime, const SolveConfig& cfg);

/// Term counts of the quadrature rule, without solving anything.
void quadrature_counts(double alpha, double kprime, int& m, int& M);
/// k' with pi^2 / (4 alpha (1 - alpha) k'^2) = k_Q.
double kprime_for_kq(double alpha, double kq);
/// Midpoint of the k' interval whose rule needs exactly `count` systems.
/// Throws BadParameters when no k' gives that count.
double kprime_for_system_count(double alpha, int count);

/// Two-step:  E2 cond^a1 + E1 cond^a2 + E1 E2 cond
/// Three-step (equal exponents): E^3 cond^2 + 3 E^2 cond^(5/4) + 3 E cond^(1/2)
/// Throws BadArity for other list lengths or mismatched sizes.
double multi_step_bound(const std::vector<double>& errors, const std::vector<double>& exponents, double cond);
/// E1 + E2 - E1 E2 for a complementary pair (a1 + a2 = 1, else BadParameters).
double complementary_pair_bound(double e1, double a1, double e2, double a2);

/// a_beta eps with a_1 = 1, a_{b+1} = 1 + (1 + eps) cond a_b.
double beta_accuracy_bound(int beta, double eps, double cond);

}  // namespace bura
