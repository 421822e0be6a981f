#include "bura/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include "bura/kernels.hpp"

namespace bura {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs body(i) for i in [0, n) on the OpenMP team.  The first exception is
// rethrown after the loop.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  std::exception_ptr first;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

std::string config_name(int m, int k, int beta) {
  return "(" + std::to_string(m) + "," + std::to_string(k) + ";" + std::to_string(beta) + ")";
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::io: return "io";
  }
  return "numeric";
}

void mark_failure(ExperimentReport& rep, json& row, const Error& e) {
  row["status"] = kind_name(e.kind());
  row["message"] = e.what();
  if (rep.failures++ == 0) rep.first_failure = e.kind();
}

template <class T>
std::vector<T> or_default(const std::vector<T>& given, std::vector<T> fallback) {
  return given.empty() ? std::move(fallback) : given;
}

std::vector<std::int64_t> powers_of_two(int lo, int hi) {
  std::vector<std::int64_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::int64_t{1} << e);
  return out;
}

const PartialFractionForm& need_pf(const CoefficientCacheEntry& e) {
  if (!e.pf)
    throw ComplexPolesDetected(config_name(e.r.m, e.r.k, e.r.beta) + " has no partial fraction form: " +
                               e.decomposition_error);
  return *e.pf;
}

// Serial per-vector solves: the parallelism sits in the loop over inputs.
SolveConfig inner_config(SolveMethod method, double rel_tol) {
  SolveConfig cfg;
  cfg.method = method;
  cfg.rel_tol = rel_tol;
  cfg.exec = Exec::serial;
  cfg.concurrent_systems = false;
  return cfg;
}

std::vector<double> minus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double cond_1d(const SpectralOracle& o) { return o.eigenvalue(o.size() - 1) / o.eigenvalue(0); }

std::vector<std::uint64_t> trial_seeds(std::uint64_t seed, int trials) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint64_t> s(static_cast<std::size_t>(trials));
  for (auto& x : s) x = gen();
  return s;
}

struct Batch {
  double max = 0.0;
  double avg = 0.0;
};

Batch reduce(const std::vector<double>& v) {
  Batch b;
  double sum = 0.0;
  for (double x : v) {
    b.max = std::max(b.max, x);
    sum += x;
  }
  b.avg = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  return b;
}

// Ratios over all eigenvectors of the oracle.
std::vector<double> eigen_ratios(const SpectralOracle& o, const std::function<double(const std::vector<double>&)>& ratio) {
  std::vector<double> out(static_cast<std::size_t>(o.size()));
  parallel_for(o.size(), [&](std::int64_t i) { out[i] = ratio(o.eigenvector(i)); });
  return out;
}

std::vector<double> random_ratios(const SpectralOracle& o, int trials, std::uint64_t seed,
                                  const std::function<double(const std::vector<double>&)>& ratio) {
  const auto seeds = trial_seeds(seed, trials);
  std::vector<double> out(seeds.size());
  parallel_for(trials, [&](std::int64_t t) { out[t] = ratio(random_eigen_mix(o, seeds[t])); });
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string csv_field(const json& v) {
  std::string s;
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string())
    s = v.get<std::string>();
  else
    s = v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

json params_json(const ExperimentParams& p) {
  json j;
  j["seed"] = p.seed;
  j["cache_dir"] = p.cache_dir.string();
  j["bits"] = p.bits;
  j["random_trials"] = p.random_trials;
  j["resolutions"] = p.resolutions;
  j["resolutions_3d"] = p.resolutions_3d;
  j["alphas"] = p.alphas;
  j["degrees"] = p.degrees;
  j["rel_tol"] = p.rel_tol;
  j["method"] = to_string(p.method);
  j["method_1d"] = to_string(p.method_1d);
  j["allow_large_2d"] = p.allow_large_2d;
  j["with_3d"] = p.with_3d;
  j["mus"] = p.mus;
  return j;
}

// ---------------------------------------------------------------- table-errors

void run_table_errors(ExperimentReport& rep, const ExperimentParams& p) {
  struct Case {
    int m, k, beta;
    double alpha;
  };
  std::vector<Case> cases;
  const auto alphas = or_default(p.alphas, {0.1, 0.25, 0.5, 0.75});
  if (!p.degrees.empty()) {
    for (int k : p.degrees)
      for (double a : alphas) cases.push_back({k, k, 1, a});
  } else {
    const std::vector<std::tuple<int, int, int>> configs = {{5, 5, 1}, {6, 6, 1}, {7, 7, 1}, {5, 5, 2}, {5, 5, 3},
                                                            {5, 4, 2}, {5, 3, 3}, {7, 6, 2}, {7, 5, 3}};
    for (auto [m, k, b] : configs)
      for (double a : alphas) cases.push_back({m, k, b, a});
  }
  std::vector<json> rows(cases.size());
  std::vector<std::exception_ptr> errs(cases.size());
  parallel_for(static_cast<std::int64_t>(cases.size()), [&](std::int64_t i) {
    const auto& c = cases[i];
    json& row = rows[i];
    row["config"] = config_name(c.m, c.k, c.beta);
    row["alpha"] = c.alpha;
    row["beta"] = c.beta;
    row["m"] = c.m;
    row["k"] = c.k;
    row["bits"] = p.bits;
    row["seed"] = p.seed;
    const auto t0 = Clock::now();
    try {
      const auto& e = obtain_approximant(c.alpha, c.beta, c.m, c.k, p);
      row["error"] = e.r.error.to_double();
      row["error_model"] = error_model(c.alpha, c.beta, c.k);
      row["iterations"] = e.r.iterations;
      row["decomposed"] = e.pf.has_value();
      row["status"] = "ok";
    } catch (const Error&) {
      errs[i] = std::current_exception();
    }
    row["wall_time"] = seconds_since(t0);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (errs[i]) {
      try {
        std::rethrow_exception(errs[i]);
      } catch (const Error& e) {
        mark_failure(rep, rows[i], e);
      }
    }
    rep.rows.push_back(std::move(rows[i]));
  }
}

// ---------------------------------------------------------------- coeff-tables

void run_coeff_tables(ExperimentReport& rep, const ExperimentParams& p) {
  const std::vector<std::tuple<int, int, int>> configs = {{5, 5, 1}, {7, 7, 1}, {5, 4, 2}, {7, 6, 2}};
  const auto alphas = or_default(p.alphas, {0.25, 0.5, 0.75});
  for (auto [m, k, b] : configs) {
    for (double a : alphas) {
      json base;
      base["config"] = config_name(m, k, b);
      base["alpha"] = a;
      base["beta"] = b;
      base["m"] = m;
      base["k"] = k;
      base["bits"] = p.bits;
      base["seed"] = p.seed;
      try {
        const auto& e = obtain_approximant(a, b, m, k, p);
        const auto& pf = need_pf(e);
        const int digits = static_cast<int>(p.bits / 3 + 2);
        auto emit = [&](const char* term, std::size_t j, const XScalar& v) {
          json row = base;
          row["term"] = term;
          row["j"] = j;
          row["value"] = v.to_double();
          row["value_full"] = v.to_string(digits);
          row["status"] = "ok";
          rep.rows.push_back(std::move(row));
        };
        emit("error", 0, e.r.error);
        for (std::size_t j = 0; j < pf.c0_x.size(); ++j) emit("c0", j + 1, pf.c0_x[j]);
        for (std::size_t j = 0; j < pf.c_x.size(); ++j) emit("c", j + 1, pf.c_x[j]);
        for (std::size_t j = 0; j < pf.d_x.size(); ++j) emit("d", j + 1, pf.d_x[j]);
      } catch (const Error& err) {
        json row = base;
        mark_failure(rep, row, err);
        rep.rows.push_back(std::move(row));
      }
    }
  }
}

// ------------------------------------------------------------- fig-1d-validate

void run_fig_1d_validate(ExperimentReport& rep, const ExperimentParams& p) {
  const auto degrees = or_default(p.degrees, {7});
  const auto alphas = or_default(p.alphas, {0.25, 0.5, 0.75});
  const auto sizes = or_default(p.resolutions, powers_of_two(3, 10));
  const SolveConfig cfg = inner_config(p.method_1d, p.rel_tol);
  // (m, m; 1) and (m, m - 1; 2)
  for (int m : degrees) {
    for (int beta : {1, 2}) {
      const int k = m + 1 - beta;
      for (double a : alphas) {
        for (std::int64_t n : sizes) {
          json row;
          row["config"] = config_name(m, k, beta);
          row["alpha"] = a;
          row["beta"] = beta;
          row["m"] = m;
          row["k"] = k;
          row["h_inv"] = n;
          row["N"] = n;
          row["method"] = to_string(cfg.method);
          row["rel_tol"] = cfg.rel_tol;
          row["seed"] = p.seed;
          row["trials"] = p.random_trials;
          const auto t0 = Clock::now();
          try {
            if (n > (std::int64_t{1} << 20) - 1) throw BadResolution("1D size above the desk-scale cap 2^20 - 1");
            const auto& e = obtain_approximant(a, beta, m, k, p);
            const auto& pf = need_pf(e);
            const auto A = assemble(OperatorKind::laplace1d, 1.0 / static_cast<double>(n + 1));
            const SpectralOracle o(A);
            auto ratio = [&](const std::vector<double>& f) {
              const auto ur = bura_apply(pf, A, f, cfg).u_r;
              const auto u = oracle_frac_apply(o, -a, f);
              return weighted_norm(o, 1.0, minus(ur, u)) / weighted_norm(o, 1.0 - 2.0 * beta, f);
            };
            const auto eig = reduce(eigen_ratios(o, ratio));
            const auto rnd = reduce(random_ratios(o, p.random_trials, p.seed, ratio));
            const double cond = cond_1d(o);
            const double bound = pf.error * (1.0 + 10.0 * cfg.rel_tol * cond);
            row["E"] = pf.error;
            row["cond"] = cond;
            row["avg_eigen_error"] = eig.avg;
            row["max_eigen_error"] = eig.max;
            row["avg_random_error"] = rnd.avg;
            row["max_random_error"] = rnd.max;
            row["bound"] = bound;
            row["bound_ok"] = std::max(eig.max, rnd.max) <= bound;
            row["iterations"] = (o.size() + p.random_trials) * static_cast<std::int64_t>(pf.c.size() + pf.c0.size());
            row["status"] = "ok";
          } catch (const Error& err) {
            mark_failure(rep, row, err);
          }
          row["wall_time"] = seconds_since(t0);
          rep.rows.push_back(std::move(row));
        }
      }
    }
  }
}

// ---------------------------------------------------------------- multistep-1d

void run_multistep_1d(ExperimentReport& rep, const ExperimentParams& p) {
  struct Scheme {
    const char* name;
    std::vector<double> steps;  // in application order
  };
  const std::vector<Scheme> schemes = {{"0.25x2", {0.25, 0.25}}, {"0.25x3", {0.25, 0.25, 0.25}}, {"0.5+0.25", {0.5, 0.25}}};
  const auto degrees = or_default(p.degrees, {5, 7});
  const auto sizes = or_default(p.resolutions, powers_of_two(3, 10));
  const SolveConfig cfg = inner_config(p.method_1d, p.rel_tol);
  for (int k : degrees) {
    for (const auto& s : schemes) {
      double target = 0.0;
      for (double a : s.steps) target += a;
      for (std::int64_t n : sizes) {
        json row;
        row["k"] = k;
        row["scheme"] = s.name;
        row["steps"] = s.steps;
        row["alpha"] = target;
        row["h_inv"] = n;
        row["N"] = n;
        row["method"] = to_string(cfg.method);
        row["seed"] = p.seed;
        row["trials"] = p.random_trials;
        const auto t0 = Clock::now();
        try {
          std::vector<PartialFractionForm> pfs;
          std::vector<double> errs;
          for (double a : s.steps) {
            pfs.push_back(need_pf(obtain_approximant(a, 1, k, k, p)));
            errs.push_back(pfs.back().error);
          }
          const auto A = assemble(OperatorKind::laplace1d, 1.0 / static_cast<double>(n + 1));
          const SpectralOracle o(A);
          auto ratio = [&](const std::vector<double>& f) {
            const auto ur = multi_step_apply(pfs, target, A, f, cfg).u_r;
            const auto u = oracle_frac_apply(o, -target, f);
            return weighted_norm(o, 1.0, minus(ur, u)) / weighted_norm(o, -1.0, f);
          };
          const auto eig = reduce(eigen_ratios(o, ratio));
          const auto rnd = reduce(random_ratios(o, p.random_trials, p.seed, ratio));
          const double cond = cond_1d(o);
          const double bound = multi_step_bound(errs, s.steps, cond);
          row["E"] = errs;
          row["cond"] = cond;
          row["avg_eigen_error"] = eig.avg;
          row["max_eigen_error"] = eig.max;
          row["avg_random_error"] = rnd.avg;
          row["max_random_error"] = rnd.max;
          row["bound"] = bound;
          row["bound_ok"] = std::max(eig.max, rnd.max) <= bound;
          row["status"] = "ok";
        } catch (const Error& err) {
          mark_failure(rep, row, err);
        }
        row["wall_time"] = seconds_since(t0);
        rep.rows.push_back(std::move(row));
      }
    }
  }
}

// ------------------------------------------------------------------ compare-2d

void run_compare_2d(ExperimentReport& rep, const ExperimentParams& p) {
  const auto res = or_default(p.resolutions, {128});
  const auto alphas = or_default(p.alphas, {0.25, 0.5, 0.75});
  auto default_k = [](double a) { return a < 0.375 ? 9 : (a < 0.625 ? 8 : 7); };
  auto default_kq = [](double a) { return a < 0.375 ? 9 : (a < 0.625 ? 7 : 6); };
  SolveConfig cfg;
  cfg.method = p.method;
  cfg.rel_tol = p.rel_tol;
  for (std::int64_t hinv : res) {
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      const double a = alphas[ai];
      const int k = p.degrees.empty() ? default_k(a) : p.degrees[ai % p.degrees.size()];
      const int kq = default_kq(a);
      json base;
      base["alpha"] = a;
      base["h_inv"] = hinv;
      base["N"] = (hinv - 1) * (hinv - 1);
      base["rel_tol"] = cfg.rel_tol;
      base["solver"] = to_string(cfg.method);
      base["seed"] = p.seed;
      try {
        const std::int64_t cap = p.allow_large_2d ? 1024 : 512;
        if (hinv > cap) throw BadResolution("2D h^-1 = " + std::to_string(hinv) + " above the cap " + std::to_string(cap));
        const auto A = assemble(OperatorKind::laplace2d5pt, 1.0 / static_cast<double>(hinv));
        const SpectralOracle o(A);
        const auto f = special_rhs(RhsKind::checkerboard, A, p.seed);
        auto u_exact = oracle_frac_apply(o, -a, f);
        const double s = std::pow(A.scale, -a);
        for (auto& x : u_exact) x *= s;
        const double fnorm = kernels::norm2(f);
        {
          json row = base;
          row["method"] = "bura";
          row["k"] = k;
          const auto t0 = Clock::now();
          try {
            const auto& pf = need_pf(obtain_approximant(a, 1, k, k, p));
            const auto r = bura_apply_unnormalized(pf, A, f, cfg);
            std::int64_t its = 0;
            for (const auto& st : r.per_system) its += st.iterations;
            row["systems"] = static_cast<int>(r.per_system.size());
            row["rel_error"] = kernels::norm2(minus(u_exact, r.u_r)) / fnorm;
            row["iterations"] = its;
            row["status"] = "ok";
          } catch (const Error& err) {
            mark_failure(rep, row, err);
          }
          row["wall_time"] = seconds_since(t0);
          rep.rows.push_back(std::move(row));
        }
        {
          json row = base;
          row["method"] = "quadrature";
          row["kq"] = kq;
          const auto t0 = Clock::now();
          try {
            const double kp = kprime_for_kq(a, kq);
            const auto q = quadrature_apply(A, f, a, kp, cfg);
            std::int64_t its = 0;
            for (const auto& st : q.per_system) its += st.iterations;
            row["kprime"] = kp;
            row["systems"] = q.system_count;
            row["rel_error"] = kernels::norm2(minus(u_exact, q.u)) / fnorm;
            row["iterations"] = its;
            row["status"] = "ok";
          } catch (const Error& err) {
            mark_failure(rep, row, err);
          }
          row["wall_time"] = seconds_since(t0);
          rep.rows.push_back(std::move(row));
        }
      } catch (const Error& err) {
        json row = base;
        mark_failure(rep, row, err);
        rep.rows.push_back(std::move(row));
      }
    }
  }
}

// -------------------------------------------------------------------- id-check

struct Pair {
  const char* name;
  double first, second;  // application order
};
const std::vector<Pair> kPairs = {{"0.75/0.25", 0.75, 0.25}, {"0.5/0.5", 0.5, 0.5}};

// ||A u2 - f|| / ||A^-1 f|| with u2 the two chained BURA applications.
double reconstruction_ratio(const PartialFractionForm& first, const PartialFractionForm& second,
                            const SparseSpdOperator& A, const std::vector<double>& f, const std::vector<double>& ainv_f,
                            const SolveConfig& cfg, std::int64_t* iterations = nullptr) {
  const auto r1 = bura_apply(first, A, f, cfg);
  const auto r2 = bura_apply(second, A, r1.u_r, cfg);
  if (iterations) {
    for (const auto& s : r1.per_system) *iterations += s.iterations;
    for (const auto& s : r2.per_system) *iterations += s.iterations;
  }
  std::vector<double> fr;
  kernels::spmv(A, 0.0, r2.u_r, fr, cfg.exec);
  return kernels::norm2(minus(fr, f), cfg.exec) / kernels::norm2(ainv_f, cfg.exec);
}

void run_id_check(ExperimentReport& rep, const ExperimentParams& p) {
  const auto degrees = or_default(p.degrees, {5, 7});
  const auto sizes = or_default(p.resolutions, powers_of_two(4, 12));
  const SolveConfig cfg1 = inner_config(p.method_1d, p.rel_tol);
  for (int k : degrees) {
    for (const auto& pr : kPairs) {
      for (std::int64_t n : sizes) {
        json row;
        row["dim"] = 1;
        row["k"] = k;
        row["pair"] = pr.name;
        row["h_inv"] = n;
        row["N"] = n;
        row["mu"] = 1.0;
        row["method"] = to_string(cfg1.method);
        row["rel_tol"] = cfg1.rel_tol;
        row["seed"] = p.seed;
        row["trials"] = p.random_trials;
        const auto t0 = Clock::now();
        try {
          const auto& pf1 = need_pf(obtain_approximant(pr.first, 1, k, k, p));
          const auto& pf2 = need_pf(obtain_approximant(pr.second, 1, k, k, p));
          const auto A = assemble(OperatorKind::laplace1d, 1.0 / static_cast<double>(n + 1));
          const SpectralOracle o(A);
          auto ratio = [&](const std::vector<double>& f) {
            return reconstruction_ratio(pf1, pf2, A, f, oracle_frac_apply(o, -1.0, f), cfg1);
          };
          const auto eig = reduce(eigen_ratios(o, ratio));
          // Two independent batches of random mixes.
          const auto rnd1 = reduce(random_ratios(o, p.random_trials, p.seed, ratio));
          const auto rnd2 = reduce(random_ratios(o, p.random_trials, p.seed + 1, ratio));
          const auto ones = special_rhs(RhsKind::ones, A);
          const auto e1 = special_rhs(RhsKind::e1, A);
          const double bound = complementary_pair_bound(pf1.error, pr.first, pf2.error, pr.second);
          const double r_ones = ratio(ones), r_e1 = ratio(e1);
          row["E_first"] = pf1.error;
          row["E_second"] = pf2.error;
          row["bound"] = bound;
          row["plateau"] = pf1.error * pf2.error;
          row["avg_eigen_error"] = eig.avg;
          row["max_eigen_error"] = eig.max;
          row["avg_random_error"] = rnd1.avg;
          row["max_random_error"] = rnd1.max;
          row["avg_random2_error"] = rnd2.avg;
          row["max_random2_error"] = rnd2.max;
          row["ratio_ones"] = r_ones;
          row["ratio_e1"] = r_e1;
          row["bound_ok"] = std::max({eig.max, rnd1.max, rnd2.max, r_ones, r_e1}) <= bound;
          row["status"] = "ok";
        } catch (const Error& err) {
          mark_failure(rep, row, err);
        }
        row["wall_time"] = seconds_since(t0);
        rep.rows.push_back(std::move(row));
      }
    }
  }
  if (!p.with_3d) return;

  SolveConfig cfg3;
  cfg3.method = p.method;
  cfg3.rel_tol = p.rel_tol;
  const auto sizes3 = or_default(p.resolutions_3d, powers_of_two(3, 5));
  const auto mus = or_default(p.mus, {1.0, 1e-3});
  for (double mu : mus) {
    for (std::int64_t hinv : sizes3) {
      json base;
      base["dim"] = 3;
      base["h_inv"] = hinv;
      base["N"] = (hinv - 1) * (hinv - 1) * (hinv - 1);
      base["mu"] = mu;
      base["method"] = to_string(cfg3.method);
      base["rel_tol"] = cfg3.rel_tol;
      base["seed"] = p.seed;
      try {
        if (hinv > 64) throw BadResolution("3D h^-1 = " + std::to_string(hinv) + " above the cap 64");
        const auto A = assemble(OperatorKind::laplace3d7pt_jump, 1.0 / static_cast<double>(hinv), mu);
        for (RhsKind rk : {RhsKind::ones, RhsKind::e1}) {
          const auto f = special_rhs(rk, A);
          SystemStats st0;
          const auto ainv_f = shifted_solve(A, 0.0, f, cfg3, &st0);
          for (int k : degrees) {
            for (const auto& pr : kPairs) {
              json row = base;
              row["k"] = k;
              row["pair"] = pr.name;
              row["rhs"] = rk == RhsKind::ones ? "ones" : "e1";
              const auto t0 = Clock::now();
              try {
                const auto& pf1 = need_pf(obtain_approximant(pr.first, 1, k, k, p));
                const auto& pf2 = need_pf(obtain_approximant(pr.second, 1, k, k, p));
                std::int64_t its = st0.iterations;
                const double r = reconstruction_ratio(pf1, pf2, A, f, ainv_f, cfg3, &its);
                const double bound = complementary_pair_bound(pf1.error, pr.first, pf2.error, pr.second);
                row["E_first"] = pf1.error;
                row["E_second"] = pf2.error;
                row["bound"] = bound;
                row["plateau"] = pf1.error * pf2.error;
                row["ratio"] = r;
                row["bound_ok"] = r <= bound;
                row["iterations"] = its;
                row["status"] = "ok";
              } catch (const Error& err) {
                mark_failure(rep, row, err);
              }
              row["wall_time"] = seconds_since(t0);
              rep.rows.push_back(std::move(row));
            }
          }
        }
      } catch (const Error& err) {
        json row = base;
        mark_failure(rep, row, err);
        rep.rows.push_back(std::move(row));
      }
    }
  }
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"table-errors", "coeff-tables", "fig-1d-validate",
                                               "multistep-1d", "compare-2d",   "id-check"};
  return ids;
}

const CoefficientCacheEntry& obtain_approximant(double alpha, int beta, int m, int k,
                                                const ExperimentParams& params) {
  // Approximants are reused across experiments of one process.
  static std::mutex mu;
  static std::map<std::tuple<double, int, int, int, mpfr_prec_t>, CoefficientCacheEntry> memo;
  const auto key = std::make_tuple(alpha, beta, m, k, params.bits);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  RemezConfig cfg;
  cfg.precision_bits = params.bits;
  CoefficientCacheEntry e = params.cache_dir.empty()
                                ? make_cache_entry(compute_bura(alpha, beta, m, k, cfg), cfg.delta_rel)
                                : CoefficientCache(params.cache_dir).get_or_compute(alpha, beta, m, k, cfg);
  std::lock_guard<std::mutex> lock(mu);
  return memo.emplace(key, std::move(e)).first->second;
}

ExperimentReport run_experiment(const std::string& id, const ExperimentParams& params) {
  ExperimentReport rep;
  rep.id = id;
  rep.seed = params.seed;
  rep.params = params_json(params);
  if (id == "table-errors")
    run_table_errors(rep, params);
  else if (id == "coeff-tables")
    run_coeff_tables(rep, params);
  else if (id == "fig-1d-validate")
    run_fig_1d_validate(rep, params);
  else if (id == "multistep-1d")
    run_multistep_1d(rep, params);
  else if (id == "compare-2d")
    run_compare_2d(rep, params);
  else if (id == "id-check")
    run_id_check(rep, params);
  else
    throw UnknownExperiment("unknown experiment '" + id + "'");
  return rep;
}

std::string ExperimentReport::to_csv() const {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (const auto& [key, v] : r.items())
      if (key != "wall_time" && std::find(cols.begin(), cols.end(), key) == cols.end()) cols.push_back(key);
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      if (r.contains(cols[i])) out += csv_field(r.at(cols[i]));
    }
    out += '\n';
  }
  return out;
}

std::string ExperimentReport::to_json() const {
  json j;
  j["experiment"] = id;
  j["seed"] = seed;
  j["tool_version"] = kToolVersion;
  j["params"] = params;
  j["failures"] = failures;
  j["rows"] = rows;
  return j.dump(2);
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& ext, const std::string& text) {
    const auto path = dir / (report.id + ext);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path.string());
  };
  write(".csv", report.to_csv());
  write(".json", report.to_json() + "\n");
}

}  // namespace bura
