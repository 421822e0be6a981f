#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bura {

enum class OperatorKind { laplace1d, laplace2d5pt, laplace3d7pt_jump, external };

const char* to_string(OperatorKind kind);

/// Normalized SPD matrix A = AA / scale in CSR form, spectrum in (0, 1].
struct SparseSpdOperator {
  std::int64_t n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> values;
  /// Spectral upper bound of the unnormalized matrix.
  double scale = 1.0;
  OperatorKind kind = OperatorKind::external;
  double h = 0.0;
  double mu = 1.0;
  /// Grid points per direction (0 for external matrices).
  std::int64_t nx = 0;
  int dim = 0;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  /// True when every row only couples to its immediate neighbours.
  bool is_tridiagonal() const;
  double diagonal(std::int64_t i) const;
};

/// Model operators on the unit interval, square or cube with n = (1/h - 1)^dim
/// interior nodes, x-fastest ordering.  h must be 1/resolution with
/// resolution >= 2 and mu in (0, 1]; throws BadResolution otherwise.
///   1D: tridiag(-1/4, 1/2, -1/4)
///   2D: h^2/8 times the 5-point Laplacian
///   3D: 7-point finite differences of -div(a grad u), a = mu for x1 < 1/2 and
///       1 elsewhere, harmonic-mean face coefficients, scaled by the
///       Gershgorin bound.
SparseSpdOperator assemble(OperatorKind kind, double h, double mu = 1.0);

/// Symmetric coordinate Matrix Market file (1-based).  scale <= 0 selects the
/// Gershgorin bound.  Throws IoError on unreadable or non-symmetric input.
SparseSpdOperator load_matrix_market(const std::string& path, double scale = 0.0);

/// max_i sum_j |A_ij| of the stored (normalized) matrix.
double gershgorin_bound(const SparseSpdOperator& A);

/// Closed-form eigenpairs of the 1D and 2D model operators.  Eigenvectors are
/// unnormalized sine vectors, Psi_i(k) = sin(i k pi h), so ||Psi_i||^2 = (N+1)/2
/// in 1D and its square in 2D.  Indices are 1-based, 2D pairs are flattened as
/// (j - 1) * N + (i - 1).
class SpectralOracle {
 public:
  /// Throws BadResolution for kinds other than laplace1d / laplace2d5pt.
  explicit SpectralOracle(const SparseSpdOperator& A);
  SpectralOracle(OperatorKind kind, std::int64_t n_per_dim);

  OperatorKind kind() const { return kind_; }
  std::int64_t size() const { return size_; }
  std::int64_t n_per_dim() const { return n_; }

  double eigenvalue(std::int64_t flat) const;
  double eigvec_norm2() const;
  std::vector<double> eigenvector(std::int64_t flat) const;

  /// <f, Psi_i> for every i, by a DST-I.
  std::vector<double> analyze(const std::vector<double>& f) const;
  /// sum_i a_i Psi_i, by a DST-I.
  std::vector<double> synthesize(const std::vector<double>& a) const;

  /// Direct O(N^2) versions of analyze / synthesize, kept as a test reference.
  std::vector<double> analyze_direct(const std::vector<double>& f) const;
  std::vector<double> synthesize_direct(const std::vector<double>& a) const;

 private:
  OperatorKind kind_;
  std::int64_t n_;
  std::int64_t size_;
};

enum class RhsKind { ones, e1, checkerboard, random_eigen_mix };

/// ones / e1 need only n; checkerboard needs a 2D operator (values +-1 by the
/// sign of (x - 1/2)(y - 1/2)); random_eigen_mix needs the oracle and draws
/// gamma_i uniform on [-1, 1] from a generator seeded with seed.
std::vector<double> special_rhs(RhsKind kind, const SparseSpdOperator& A, std::uint64_t seed = 42);
std::vector<double> random_eigen_mix(const SpectralOracle& oracle, std::uint64_t seed);

/// sum_i lambda_i^gamma <f, Psi_i> / ||Psi_i||^2 Psi_i.
std::vector<double> oracle_frac_apply(const SpectralOracle& oracle, double gamma, const std::vector<double>& f);

/// sqrt(sum_i lambda_i^gamma <v, Psi_i>^2 / ||Psi_i||^2).
double weighted_norm(const SpectralOracle& oracle, double gamma, const std::vector<double>& v);

}  // namespace bura
