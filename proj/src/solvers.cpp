#include "bura/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>

#include "bura/errors.hpp"

namespace bura {

namespace {

using Vec = std::vector<double>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double true_rel_residual(const SparseSpdOperator& A, double shift, const Vec& x, const Vec& b, Exec exec) {
  Vec r;
  kernels::spmv(A, shift, x, r, exec);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double nb = kernels::norm2(b, exec);
  return nb > 0.0 ? kernels::norm2(r, exec) / nb : kernels::norm2(r, exec);
}

Vec thomas(const SparseSpdOperator& A, double shift, const Vec& b) {
  const std::int64_t n = A.n;
  Vec lo(n, 0.0), di(n, 0.0), up(n, 0.0);
  for (std::int64_t i = 0; i < n; ++i)
    for (auto p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
      const auto j = A.col_idx[p];
      if (j == i - 1) lo[i] = A.values[p];
      else if (j == i) di[i] = A.values[p] - shift;
      else up[i] = A.values[p];
    }
  Vec c(n), x(n);
  double piv = di[0];
  c[0] = up[0] / piv;
  x[0] = b[0] / piv;
  for (std::int64_t i = 1; i < n; ++i) {
    piv = di[i] - lo[i] * c[i - 1];
    c[i] = up[i] / piv;
    x[i] = (b[i] - lo[i] * x[i - 1]) / piv;
  }
  for (std::int64_t i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

using Precond = std::function<void(const Vec&, Vec&)>;

Precond make_preconditioner(const SparseSpdOperator& A, double shift, SolveMethod method, Exec exec) {
  if (method == SolveMethod::cg) return {};
  if (method == SolveMethod::pcg_jacobi) {
    auto inv = std::make_shared<Vec>(static_cast<std::size_t>(A.n));
    for (std::int64_t i = 0; i < A.n; ++i) (*inv)[i] = 1.0 / (A.diagonal(i) - shift);
    return [inv, exec](const Vec& r, Vec& z) { kernels::scale_by(*inv, r, z, exec); };
  }
  // Limited-memory incomplete Cholesky on the lower triangle, natural order,
  // fill restricted to the nonzero count of A's columns.
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(static_cast<std::size_t>(A.nnz()));
  for (std::int64_t i = 0; i < A.n; ++i)
    for (auto p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
      const auto j = A.col_idx[p];
      if (j > i) continue;
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), A.values[p] - (j == i ? shift : 0.0));
    }
  SpMat L(static_cast<int>(A.n), static_cast<int>(A.n));
  L.setFromTriplets(trip.begin(), trip.end());
  auto ic = std::make_shared<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>();
  ic->compute(L);
  if (ic->info() != Eigen::Success) throw InvariantViolated("incomplete Cholesky factorization failed");
  return [ic](const Vec& r, Vec& z) {
    z.resize(r.size());
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    zv = ic->solve(rv);
  };
}

Vec pcg(const SparseSpdOperator& A, double shift, const Vec& b, const SolveConfig& cfg, SystemStats& st) {
  const Exec ex = cfg.exec;
  const std::int64_t n = A.n;
  const std::int64_t max_iter = cfg.max_iter > 0 ? cfg.max_iter : 10 * n;
  const Precond M = make_preconditioner(A, shift, cfg.method, ex);

  Vec x(n, 0.0), r = b, z, p, q;
  const double nb = kernels::norm2(b, ex);
  if (nb == 0.0) return x;
  const double stop = cfg.rel_tol * nb;
  if (M) M(r, z);
  else z = r;
  p = z;
  double rz = kernels::dot(r, z, ex);
  double rn = nb;
  std::int64_t it = 0;
  while (rn > stop) {
    if (it >= max_iter) throw MaxIterExceeded(static_cast<int>(it), rn / nb);
    kernels::spmv(A, shift, p, q, ex);
    const double a = rz / kernels::dot(p, q, ex);
    kernels::axpy(a, p, x, ex);
    kernels::axpy(-a, q, r, ex);
    ++it;
    rn = kernels::norm2(r, ex);
    if (cfg.record_history) st.history.push_back(rn / nb);
    if (rn <= stop) break;
    if (M) M(r, z);
    else z = r;
    const double rz_new = kernels::dot(r, z, ex);
    kernels::xpby(z, rz_new / rz, p, ex);
    rz = rz_new;
  }
  st.iterations = static_cast<int>(it);
  return x;
}

void check_rhs(const SparseSpdOperator& A, const Vec& f) {
  if (static_cast<std::int64_t>(f.size()) != A.n)
    throw BadParameters("right-hand side has length " + std::to_string(f.size()) + ", operator has " +
                        std::to_string(A.n));
}

std::string shift_context(double shift) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "shift %.6e", shift);
  return buf;
}

// Runs each task once; task i writes only its own slot.  Exceptions are
// collected and the lowest-index one is rethrown.
void run_tasks(std::size_t count, bool concurrent, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errs(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1) if (concurrent && count > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      task(static_cast<std::size_t>(i));
    } catch (...) {
      errs[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::thomas: return "thomas";
    case SolveMethod::cg: return "cg";
    case SolveMethod::pcg_jacobi: return "pcg_jacobi";
    case SolveMethod::pcg_ic0: return "pcg_ic0";
  }
  return "unknown";
}

SolveMethod parse_method(const std::string& name) {
  for (auto m : {SolveMethod::thomas, SolveMethod::cg, SolveMethod::pcg_jacobi, SolveMethod::pcg_ic0})
    if (name == to_string(m)) return m;
  throw BadParameters("unknown solve method '" + name + "'");
}

std::vector<double> shifted_solve(const SparseSpdOperator& A, double shift, const std::vector<double>& b,
                                  const SolveConfig& cfg, SystemStats* stats) {
  if (!(shift <= 0.0)) throw BadParameters("shift must be <= 0, got " + std::to_string(shift));
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0)) throw BadParameters("rel_tol must lie in (0, 1)");
  check_rhs(A, b);
  SystemStats st;
  st.shift = shift;
  Vec x;
  if (cfg.method == SolveMethod::thomas) {
    if (!A.is_tridiagonal()) throw MethodMismatch("thomas needs a tridiagonal operator");
    x = thomas(A, shift, b);
    st.iterations = 1;
  } else {
    try {
      x = pcg(A, shift, b, cfg, st);
    } catch (const MaxIterExceeded& e) {
      throw MaxIterExceeded(static_cast<int>(cfg.max_iter > 0 ? cfg.max_iter : 10 * A.n), e.residual(),
                            shift_context(shift));
    }
  }
  st.rel_residual = true_rel_residual(A, shift, x, b, cfg.exec);
  if (stats) *stats = std::move(st);
  return x;
}

FracSolveReport bura_apply(const PartialFractionForm& pf, const SparseSpdOperator& A, const std::vector<double>& f,
                           const SolveConfig& cfg) {
  check_rhs(A, f);
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t beta = pf.c0.size();
  const std::size_t k = pf.c.size();

  // Task 0 is the chain A^-1 f, ..., A^-beta f; task j >= 1 the pole d_j.
  std::vector<Vec> powers(beta);
  std::vector<Vec> poles(k);
  std::vector<SystemStats> stats(beta + k);
  run_tasks(k + 1, cfg.concurrent_systems, [&](std::size_t t) {
    if (t == 0) {
      const Vec* src = &f;
      for (std::size_t i = 0; i < beta; ++i) {
        powers[i] = shifted_solve(A, 0.0, *src, cfg, &stats[i]);
        src = &powers[i];
      }
    } else {
      poles[t - 1] = shifted_solve(A, pf.d[t - 1], f, cfg, &stats[beta + t - 1]);
    }
  });

  FracSolveReport rep;
  rep.u_r.assign(f.size(), 0.0);
  for (std::size_t i = 0; i < beta; ++i) kernels::axpy(pf.c0[i], powers[i], rep.u_r, Exec::serial);
  for (std::size_t j = 0; j < k; ++j) kernels::axpy(pf.c[j], poles[j], rep.u_r, Exec::serial);
  rep.per_system = std::move(stats);
  rep.wall_time = seconds_since(t0);
  rep.alpha = pf.alpha;
  rep.beta = pf.beta;
  rep.m = pf.m;
  rep.k = pf.k;
  rep.rel_tol = cfg.rel_tol;
  rep.method = cfg.method;
  return rep;
}

FracSolveReport bura_apply_unnormalized(const PartialFractionForm& pf, const SparseSpdOperator& A,
                                        const std::vector<double>& f_tilde, const SolveConfig& cfg) {
  FracSolveReport rep = bura_apply(pf, A, f_tilde, cfg);
  const double s = std::pow(A.scale, -pf.alpha);
  for (auto& v : rep.u_r) v *= s;
  return rep;
}

FracSolveReport bura_apply_product(const ZeroPoleSet& zp, const SparseSpdOperator& A, const std::vector<double>& f,
                                   const SolveConfig& cfg) {
  check_rhs(A, f);
  if (zp.zeros.size() > zp.poles.size())
    throw BadParameters("product form needs at most as many zeros as poles");
  const auto t0 = std::chrono::steady_clock::now();
  FracSolveReport rep;
  SystemStats st;
  Vec u = shifted_solve(A, 0.0, f, cfg, &st);
  rep.per_system.push_back(st);
  for (std::size_t j = 0; j < zp.poles.size(); ++j) {
    const double d = zp.poles[j].to_double();
    Vec y = shifted_solve(A, d, u, cfg, &st);
    rep.per_system.push_back(st);
    if (j < zp.zeros.size()) {
      // (A - zeta)(A - d)^-1 u = u + (d - zeta) y
      const double gap = (zp.poles[j] - zp.zeros[j]).to_double();
      kernels::axpy(gap, y, u, cfg.exec);
    } else {
      u = std::move(y);
    }
  }
  const double lead = zp.lead.to_double();
  for (auto& v : u) v *= lead;
  rep.u_r = std::move(u);
  rep.wall_time = seconds_since(t0);
  rep.beta = 1;
  rep.m = static_cast<int>(zp.zeros.size());
  rep.k = static_cast<int>(zp.poles.size());
  rep.rel_tol = cfg.rel_tol;
  rep.method = cfg.method;
  return rep;
}

FracSolveReport multi_step_apply(const std::vector<PartialFractionForm>& pfs, double target_alpha,
                                 const SparseSpdOperator& A, const std::vector<double>& f, const SolveConfig& cfg) {
  if (pfs.empty()) throw BadParameters("multi-step application needs at least one form");
  double sum = 0.0;
  for (const auto& pf : pfs) {
    if (pf.beta != 1) throw BadParameters("multi-step forms must have beta = 1");
    sum += pf.alpha;
  }
  if (std::abs(sum - target_alpha) > 1e-12)
    throw BadParameters("step exponents sum to " + std::to_string(sum) + ", target is " + std::to_string(target_alpha));
  const auto t0 = std::chrono::steady_clock::now();
  FracSolveReport rep;
  Vec u = f;
  for (const auto& pf : pfs) {
    FracSolveReport step = bura_apply(pf, A, u, cfg);
    u = std::move(step.u_r);
    for (auto& s : step.per_system) rep.per_system.push_back(std::move(s));
  }
  rep.u_r = std::move(u);
  rep.wall_time = seconds_since(t0);
  rep.alpha = target_alpha;
  rep.beta = 1;
  rep.m = pfs.front().m;
  rep.k = pfs.front().k;
  rep.rel_tol = cfg.rel_tol;
  rep.method = cfg.method;
  return rep;
}

void quadrature_counts(double alpha, double kprime, int& m, int& M) {
  if (!(kprime > 0.0)) throw BadParameters("k' must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw BadParameters("quadrature needs alpha in (0, 1)");
  const double c = M_PI * M_PI / (4.0 * kprime * kprime);
  // k' often comes from k_Q, and the round trip lands a few ulps above an
  // integer; such values count as that integer.
  auto ceil_tol = [](double x) { return static_cast<int>(std::ceil(x * (1.0 - 1e-12))); };
  m = ceil_tol(c / alpha);
  M = ceil_tol(c / (1.0 - alpha));
}

double kprime_for_kq(double alpha, double kq) {
  if (!(kq > 0.0)) throw BadParameters("k_Q must be positive");
  return M_PI / (2.0 * std::sqrt(alpha * (1.0 - alpha) * kq));
}

double kprime_for_system_count(double alpha, int count) {
  // The count is non-increasing in k'; bisect for the ends of the level set.
  auto systems = [alpha](double kp) {
    int m, M;
    quadrature_counts(alpha, kp, m, M);
    return m + M + 1;
  };
  auto first_at_most = [&](int target) {
    double lo = 1e-3, hi = 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (systems(mid) <= target) hi = mid;
      else lo = mid;
    }
    return hi;
  };
  const double a = first_at_most(count);
  const double b = first_at_most(count - 1);
  if (systems(a) != count) throw BadParameters("no k' gives exactly " + std::to_string(count) + " systems");
  return 0.5 * (a + b);
}

QuadratureResult quadrature_apply(const SparseSpdOperator& A, const std::vector<double>& f, double alpha,
                                  double kprime, const SolveConfig& cfg) {
  check_rhs(A, f);
  QuadratureResult res;
  quadrature_counts(alpha, kprime, res.m, res.M);
  res.system_count = res.m + res.M + 1;
  const auto count = static_cast<std::size_t>(res.system_count);

  // (e^{-2lk'} I + s A)^-1 f = s^-1 (A + e^{-2lk'}/s I)^-1 f
  std::vector<Vec> sol(count);
  res.per_system.resize(count);
  run_tasks(count, cfg.concurrent_systems, [&](std::size_t t) {
    const int l = static_cast<int>(t) - res.m;
    const double shift = -std::exp(-2.0 * l * kprime) / A.scale;
    sol[t] = shifted_solve(A, shift, f, cfg, &res.per_system[t]);
  });
  res.u.assign(f.size(), 0.0);
  const double pre = 2.0 * kprime * std::sin(M_PI * alpha) / M_PI / A.scale;
  for (std::size_t t = 0; t < count; ++t) {
    const int l = static_cast<int>(t) - res.m;
    kernels::axpy(pre * std::exp(2.0 * (alpha - 1.0) * l * kprime), sol[t], res.u, Exec::serial);
  }
  return res;
}

double multi_step_bound(const std::vector<double>& errors, const std::vector<double>& exponents, double cond) {
  const std::size_t n = errors.size();
  if (n != exponents.size() || (n != 2 && n != 3))
    throw BadArity("multi-step bound takes 2 or 3 (error, exponent) pairs, got " + std::to_string(errors.size()) +
                   " and " + std::to_string(exponents.size()));
  // Expanding prod_i (t^-a_i + eps_i(t)/t) - t^-alpha: every nonempty subset S
  // of steps contributes prod_{S} E_i cond^{|S| - 1 + alpha - sum_S a_i}.
  double alpha = 0.0;
  for (double a : exponents) alpha += a;
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double prod = 1.0, a_sum = 0.0;
    int size = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        prod *= errors[i];
        a_sum += exponents[i];
        ++size;
      }
    total += prod * std::pow(cond, size - 1 + alpha - a_sum);
  }
  return total;
}

double complementary_pair_bound(double e1, double a1, double e2, double a2) {
  if (std::abs(a1 + a2 - 1.0) > 1e-12) throw BadParameters("complementary pair needs exponents summing to 1");
  return e1 + e2 - e1 * e2;
}

double beta_accuracy_bound(int beta, double eps, double cond) {
  if (beta < 1) throw BadParameters("beta must be >= 1");
  double a = 1.0;
  for (int b = 1; b < beta; ++b) a = 1.0 + (1.0 + eps) * cond * a;
  return a * eps;
}

}  // namespace bura
