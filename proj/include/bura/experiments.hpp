#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bura/cache.hpp"
#include "bura/errors.hpp"
#include "bura/solvers.hpp"
#include "json.hpp"

namespace bura {

/// Knobs shared by all experiments.  Empty lists select the defaults of the
/// experiment in question.
struct ExperimentParams {
  std::uint64_t seed = 42;
  /// Where approximants are cached; empty disables the cache.
  std::filesystem::path cache_dir;
  mpfr_prec_t bits = kDefaultBits;
  int random_trials = 1000;
  /// 1D: node counts N (a table row labelled h^-1 = N uses N nodes); 2D: h^-1.
  std::vector<std::int64_t> resolutions;
  /// h^-1 of the 3D id-check runs.
  std::vector<std::int64_t> resolutions_3d;
  std::vector<double> alphas;
  /// Degrees k of the diagonal (k, k) approximants where applicable.
  std::vector<int> degrees;
  /// Tolerance of the iterative solves (2D, 3D, external).
  double rel_tol = 1e-12;
  SolveMethod method = SolveMethod::pcg_ic0;
  /// 1D runs use exact tridiagonal solves unless told otherwise.
  SolveMethod method_1d = SolveMethod::thomas;
  /// Lifts the 2D cap from h^-1 = 512 to 1024.
  bool allow_large_2d = false;
  /// id-check: run the 3D jump-coefficient part.
  bool with_3d = true;
  std::vector<double> mus;
};

/// One row per case.  Every row carries the seed and the configuration that
/// produced it.  wall_time is kept in the JSON only, so that the CSV of two
/// runs with the same seed is byte-identical.
struct ExperimentReport {
  std::string id;
  std::uint64_t seed = 0;
  nlohmann::ordered_json params;
  std::vector<nlohmann::ordered_json> rows;
  int failures = 0;
  /// Kind of the first failing case, if any.
  ErrorKind first_failure = ErrorKind::numeric;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Known ids: table-errors, coeff-tables, fig-1d-validate, multistep-1d,
/// compare-2d, id-check.  Throws UnknownExperiment for anything else.
/// Failing cases are recorded in their row (status, error) and counted;
/// the remaining cases still run.
ExperimentReport run_experiment(const std::string& id, const ExperimentParams& params);

const std::vector<std::string>& experiment_ids();

/// Writes <dir>/<id>.csv and <dir>/<id>.json.  Throws IoError.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Approximant lookup used by the experiments: the cache when params name
/// one, otherwise a fresh computation.  Entries are memoized for the life of
/// the process, so the reference stays valid.
const CoefficientCacheEntry& obtain_approximant(double alpha, int beta, int m, int k, const ExperimentParams& params);

}  // namespace bura
