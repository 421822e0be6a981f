#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bura/cache.hpp"
#include "bura/experiments.hpp"
#include "bura/kernels.hpp"
#include "bura/solvers.hpp"

using namespace bura;

namespace {

// 0 success, 2 non-convergence, 3 invariant violation, 4 I/O, 1 anything else.
int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::convergence: return 2;
    case ErrorKind::invariant: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::numeric: return 1;
  }
  return 1;
}

struct ApproxArgs {
  double alpha = 0.5;
  int beta = 1;
  int m = -1;
  int k = 5;
  long bits = kDefaultBits;
  std::string cache;
};

void add_approx_options(CLI::App* cmd, ApproxArgs& a) {
  cmd->add_option("--alpha", a.alpha, "fractional exponent in (0, 1)")->required();
  cmd->add_option("--beta", a.beta, "approximate t^(beta - alpha)")->capture_default_str();
  cmd->add_option("-m", a.m, "numerator degree (default k + 1 - beta)");
  cmd->add_option("-k", a.k, "denominator degree")->capture_default_str();
  cmd->add_option("--bits", a.bits, "MPFR mantissa bits")->capture_default_str();
  cmd->add_option("--cache", a.cache, "coefficient cache directory");
}

CoefficientCacheEntry load_or_compute(const ApproxArgs& a) {
  const int m = a.m < 0 ? a.k + 1 - a.beta : a.m;
  RemezConfig cfg;
  cfg.precision_bits = a.bits;
  if (a.cache.empty()) return make_cache_entry(compute_bura(a.alpha, a.beta, m, a.k, cfg), cfg.delta_rel);
  return CoefficientCache(a.cache).get_or_compute(a.alpha, a.beta, m, a.k, cfg);
}

void print_fractions(const CoefficientCacheEntry& e) {
  const auto& r = e.r;
  std::printf("E_%g(%d,%d;%d) = %s\n", r.alpha, r.m, r.k, r.beta, r.error.to_string(12).c_str());
  if (!e.pf) {
    std::printf("no partial fraction form: %s\n", e.decomposition_error.c_str());
    return;
  }
  const auto& pf = *e.pf;
  for (std::size_t j = 0; j < pf.c0_x.size(); ++j) std::printf("c0_%zu  % .17e\n", j + 1, pf.c0[j]);
  std::printf("%4s  %24s  %24s\n", "j", "c_j", "d_j");
  for (std::size_t j = 0; j < pf.c.size(); ++j) std::printf("%4zu  % .17e  % .17e\n", j + 1, pf.c[j], pf.d[j]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional diffusion solver based on best uniform rational approximation"};
  app.require_subcommand(1);

  ApproxArgs compute_args;
  bool compute_json = false;
  auto* compute = app.add_subcommand("compute", "compute a BURA with the Remez algorithm");
  add_approx_options(compute, compute_args);
  compute->add_flag("--json", compute_json, "print the full cache entry");

  ApproxArgs frac_args;
  auto* fractions = app.add_subcommand("fractions", "print the partial fraction coefficients");
  add_approx_options(fractions, frac_args);

  ApproxArgs solve_args;
  std::string problem = "1d", method = "cg", rhs = "random", out_file;
  std::int64_t n = 255;
  double tol = 1e-12, mu = 1.0, mm_scale = 0.0;
  std::uint64_t seed = 42;
  auto* solve = app.add_subcommand("solve", "apply A^-alpha to a right-hand side");
  add_approx_options(solve, solve_args);
  solve->add_option("--problem", problem, "1d, 2d, 3d-jump or mm:FILE")->capture_default_str();
  solve->add_option("--n", n, "1D: nodes; 2D, 3D: h^-1")->capture_default_str();
  solve->add_option("--method", method, "thomas, cg, pcg_jacobi or pcg_ic0")->capture_default_str();
  solve->add_option("--tol", tol, "relative residual tolerance")->capture_default_str();
  solve->add_option("--mu", mu, "3D coefficient jump")->capture_default_str();
  solve->add_option("--scale", mm_scale, "spectral bound of a Matrix Market input (default Gershgorin)");
  solve->add_option("--rhs", rhs, "ones, e1, checkerboard or random")->capture_default_str();
  solve->add_option("--seed", seed, "seed of the random right-hand side")->capture_default_str();
  solve->add_option("--out", out_file, "write the solution, one value per line");

  std::string exp_id, out_dir = "results";
  ExperimentParams ep;
  std::string exp_method = to_string(ep.method), exp_method_1d = to_string(ep.method_1d);
  bool no_3d = false;
  auto* experiment = app.add_subcommand("experiment", "run one of the reproduction experiments");
  experiment->add_option("id", exp_id, "experiment id")->required()->check(CLI::IsMember(experiment_ids()));
  experiment->add_option("--seed", ep.seed, "random seed")->capture_default_str();
  experiment->add_option("--out", out_dir, "report directory")->capture_default_str();
  experiment->add_option("--cache", ep.cache_dir, "coefficient cache directory");
  experiment->add_option("--bits", ep.bits, "MPFR mantissa bits")->capture_default_str();
  experiment->add_option("--trials", ep.random_trials, "random eigenvector mixes per case")->capture_default_str();
  experiment->add_option("--resolutions", ep.resolutions, "1D node counts or 2D h^-1");
  experiment->add_option("--resolutions-3d", ep.resolutions_3d, "3D h^-1");
  experiment->add_option("--alphas", ep.alphas, "fractional exponents");
  experiment->add_option("--degrees", ep.degrees, "approximation degrees k");
  experiment->add_option("--mus", ep.mus, "3D coefficient jumps");
  experiment->add_option("--tol", ep.rel_tol, "iterative solver tolerance")->capture_default_str();
  experiment->add_option("--method", exp_method, "iterative method for 2D and 3D")->capture_default_str();
  experiment->add_option("--method-1d", exp_method_1d, "method for 1D runs")->capture_default_str();
  experiment->add_flag("--large-2d", ep.allow_large_2d, "allow 2D h^-1 up to 1024");
  experiment->add_flag("--no-3d", no_3d, "skip the 3D part of id-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*compute) {
      const auto e = load_or_compute(compute_args);
      if (compute_json) {
        std::cout << cache_entry_to_json(e) << '\n';
      } else {
        std::printf("alpha %g beta %d (m,k) = (%d,%d) bits %ld\n", e.r.alpha, e.r.beta, e.r.m, e.r.k,
                    static_cast<long>(e.r.precision_bits));
        std::printf("error %s\niterations %d\n", e.r.error.to_string(12).c_str(), e.r.iterations);
        std::printf("decomposed %s\n", e.pf ? "yes" : ("no: " + e.decomposition_error).c_str());
      }
    } else if (*fractions) {
      print_fractions(load_or_compute(frac_args));
    } else if (*solve) {
      const auto e = load_or_compute(solve_args);
      if (!e.pf) throw ComplexPolesDetected("no partial fraction form: " + e.decomposition_error);
      SparseSpdOperator A;
      if (problem == "1d")
        A = assemble(OperatorKind::laplace1d, 1.0 / static_cast<double>(n + 1));
      else if (problem == "2d")
        A = assemble(OperatorKind::laplace2d5pt, 1.0 / static_cast<double>(n));
      else if (problem == "3d-jump")
        A = assemble(OperatorKind::laplace3d7pt_jump, 1.0 / static_cast<double>(n), mu);
      else if (problem.rfind("mm:", 0) == 0)
        A = load_matrix_market(problem.substr(3), mm_scale);
      else
        throw BadParameters("unknown problem '" + problem + "'");

      std::vector<double> f;
      if (rhs == "ones")
        f = special_rhs(RhsKind::ones, A);
      else if (rhs == "e1")
        f = special_rhs(RhsKind::e1, A);
      else if (rhs == "checkerboard")
        f = special_rhs(RhsKind::checkerboard, A);
      else if (rhs == "random" && (A.kind == OperatorKind::laplace1d || A.kind == OperatorKind::laplace2d5pt))
        f = special_rhs(RhsKind::random_eigen_mix, A, seed);
      else
        throw BadParameters("right-hand side '" + rhs + "' is not available for this problem");

      SolveConfig cfg;
      cfg.method = parse_method(method);
      cfg.rel_tol = tol;
      auto rep = bura_apply(*e.pf, A, f, cfg);
      rep.seed = seed;
      std::printf("problem %s n %lld nnz %lld scale %.6e\n", to_string(A.kind), static_cast<long long>(A.n),
                  static_cast<long long>(A.nnz()), A.scale);
      std::printf("alpha %g (m,k;beta) = (%d,%d;%d) E %.6e method %s tol %.1e seed %llu\n", rep.alpha, rep.m, rep.k,
                  rep.beta, e.pf->error, to_string(rep.method), rep.rel_tol, static_cast<unsigned long long>(seed));
      for (const auto& s : rep.per_system)
        std::printf("  shift % .6e  iterations %6d  residual %.3e\n", s.shift, s.iterations, s.rel_residual);
      std::printf("wall time %.3f s\n", rep.wall_time);
      if (A.kind == OperatorKind::laplace1d || A.kind == OperatorKind::laplace2d5pt) {
        const SpectralOracle o(A);
        auto u = oracle_frac_apply(o, -solve_args.alpha, f);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] -= rep.u_r[i];
        const double ratio = weighted_norm(o, 1.0, u) / weighted_norm(o, 1.0 - 2.0 * rep.beta, f);
        std::printf("error ratio %.6e (bound %.6e)\n", ratio, e.pf->error);
      }
      if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw IoError("cannot write " + out_file);
        char buf[32];
        for (double v : rep.u_r) {
          std::snprintf(buf, sizeof buf, "%.17e\n", v);
          out << buf;
        }
        if (!out.flush()) throw IoError("cannot write " + out_file);
      }
    } else if (*experiment) {
      ep.method = parse_method(exp_method);
      ep.method_1d = parse_method(exp_method_1d);
      ep.with_3d = !no_3d;
      const auto rep = run_experiment(exp_id, ep);
      write_report(rep, out_dir);
      std::printf("%s: %zu rows, %d failures -> %s\n", exp_id.c_str(), rep.rows.size(), rep.failures,
                  (std::filesystem::path(out_dir) / (exp_id + ".csv")).string().c_str());
      if (rep.failures > 0) return exit_code(rep.first_failure);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
