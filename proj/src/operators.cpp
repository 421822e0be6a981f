#include "bura/operators.hpp"

#include <fftw3.h>

#include <Eigen/SparseCore>
#include <unsupported/Eigen/SparseExtra>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <random>

#include "bura/errors.hpp"

namespace bura {

namespace {

// FFTW's planner is not reentrant; execution on private arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::int64_t resolution_of(double h) {
  if (!(h > 0.0) || !(h <= 0.5)) throw BadResolution("mesh size h must lie in (0, 1/2], got " + std::to_string(h));
  const double r = 1.0 / h;
  const auto ri = static_cast<std::int64_t>(std::llround(r));
  if (ri < 2 || std::abs(r - static_cast<double>(ri)) > 1e-9 * r)
    throw BadResolution("mesh size h must be 1/resolution with integer resolution >= 2, got " + std::to_string(h));
  return ri;
}

// Row-by-row CSR builder.  Rows must be appended in order.
struct CsrBuilder {
  SparseSpdOperator& A;
  explicit CsrBuilder(SparseSpdOperator& op) : A(op) { A.row_ptr.assign(1, 0); }
  void entry(std::int64_t col, double v) {
    A.col_idx.push_back(col);
    A.values.push_back(v);
  }
  void end_row() { A.row_ptr.push_back(static_cast<std::int64_t>(A.values.size())); }
};

void assemble_1d(SparseSpdOperator& A) {
  const std::int64_t N = A.nx;
  CsrBuilder b(A);
  for (std::int64_t i = 0; i < N; ++i) {
    if (i > 0) b.entry(i - 1, -0.25);
    b.entry(i, 0.5);
    if (i + 1 < N) b.entry(i + 1, -0.25);
    b.end_row();
  }
  A.scale = 4.0 / (A.h * A.h);
}

void assemble_2d(SparseSpdOperator& A) {
  const std::int64_t N = A.nx;
  CsrBuilder b(A);
  for (std::int64_t y = 0; y < N; ++y)
    for (std::int64_t x = 0; x < N; ++x) {
      const std::int64_t p = y * N + x;
      if (y > 0) b.entry(p - N, -0.125);
      if (x > 0) b.entry(p - 1, -0.125);
      b.entry(p, 0.5);
      if (x + 1 < N) b.entry(p + 1, -0.125);
      if (y + 1 < N) b.entry(p + N, -0.125);
      b.end_row();
    }
  A.scale = 8.0 / (A.h * A.h);
}

void assemble_3d_jump(SparseSpdOperator& A) {
  const std::int64_t N = A.nx;
  const double h = A.h;
  const double inv_h2 = 1.0 / (h * h);
  auto coef = [&](std::int64_t i) { return (static_cast<double>(i + 1) * h < 0.5) ? A.mu : 1.0; };
  auto face = [](double a, double b) { return 2.0 * a * b / (a + b); };

  CsrBuilder b(A);
  double bound = 0.0;
  for (std::int64_t z = 0; z < N; ++z)
    for (std::int64_t y = 0; y < N; ++y)
      for (std::int64_t x = 0; x < N; ++x) {
        const std::int64_t p = (z * N + y) * N + x;
        const double ap = coef(x);
        // a only varies with x1, so y/z faces carry a_p and the x faces the
        // harmonic mean with the neighbour (or a_p across the boundary).
        const double aw = x > 0 ? face(ap, coef(x - 1)) : ap;
        const double ae = x + 1 < N ? face(ap, coef(x + 1)) : ap;
        const double diag = (aw + ae + 4.0 * ap) * inv_h2;
        double off = 0.0;
        auto nb = [&](std::int64_t col, double a) {
          b.entry(col, -a * inv_h2);
          off += a * inv_h2;
        };
        if (z > 0) nb(p - N * N, ap);
        if (y > 0) nb(p - N, ap);
        if (x > 0) nb(p - 1, aw);
        b.entry(p, diag);
        if (x + 1 < N) nb(p + 1, ae);
        if (y + 1 < N) nb(p + N, ap);
        if (z + 1 < N) nb(p + N * N, ap);
        b.end_row();
        bound = std::max(bound, diag + off);
      }
  for (auto& v : A.values) v /= bound;
  A.scale = bound;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::laplace1d: return "laplace1d";
    case OperatorKind::laplace2d5pt: return "laplace2d5pt";
    case OperatorKind::laplace3d7pt_jump: return "laplace3d7pt_jump";
    case OperatorKind::external: return "external";
  }
  return "unknown";
}

bool SparseSpdOperator::is_tridiagonal() const {
  for (std::int64_t i = 0; i < n; ++i)
    for (auto p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
      if (std::abs(col_idx[p] - i) > 1) return false;
  return true;
}

double SparseSpdOperator::diagonal(std::int64_t i) const {
  for (auto p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
    if (col_idx[p] == i) return values[p];
  return 0.0;
}

SparseSpdOperator assemble(OperatorKind kind, double h, double mu) {
  if (kind == OperatorKind::external) throw BadResolution("external operators are loaded, not assembled");
  if (!(mu > 0.0 && mu <= 1.0)) throw BadResolution("coefficient jump mu must lie in (0, 1], got " + std::to_string(mu));
  const std::int64_t res = resolution_of(h);

  SparseSpdOperator A;
  A.kind = kind;
  A.h = 1.0 / static_cast<double>(res);
  A.mu = mu;
  A.nx = res - 1;
  switch (kind) {
    case OperatorKind::laplace1d:
      A.dim = 1;
      A.n = A.nx;
      assemble_1d(A);
      break;
    case OperatorKind::laplace2d5pt:
      A.dim = 2;
      A.n = A.nx * A.nx;
      assemble_2d(A);
      break;
    default:
      A.dim = 3;
      A.n = A.nx * A.nx * A.nx;
      assemble_3d_jump(A);
      break;
  }
  return A;
}

SparseSpdOperator load_matrix_market(const std::string& path, double scale) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("cannot read matrix file " + path);
  int sym = 0;
  bool is_complex = false, is_dense = false;
  if (!Eigen::getMarketHeader(path, sym, is_complex, is_dense) || is_complex || is_dense)
    throw IoError(path + ": expected a real coordinate Matrix Market file");
  if (sym != Eigen::Symmetric) throw IoError(path + ": matrix is not declared symmetric");

  // loadMarket keeps only the stored triangle.
  Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t> T;
  if (!Eigen::loadMarket(T, path)) throw IoError("failed to parse matrix file " + path);
  if (T.rows() != T.cols() || T.rows() == 0) throw IoError(path + ": matrix is not square");
  using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;
  const Csr lower = T.triangularView<Eigen::StrictlyLower>();
  const Csr upper = T.triangularView<Eigen::StrictlyUpper>();
  if (lower.nonZeros() > 0 && upper.nonZeros() > 0) throw IoError(path + ": symmetric file stores both triangles");
  Csr full = Csr(lower.transpose()) + Csr(upper.transpose());
  full += T;
  full.makeCompressed();

  SparseSpdOperator A;
  A.kind = OperatorKind::external;
  A.n = full.rows();
  A.row_ptr.assign(full.outerIndexPtr(), full.outerIndexPtr() + A.n + 1);
  A.col_idx.assign(full.innerIndexPtr(), full.innerIndexPtr() + full.nonZeros());
  A.values.assign(full.valuePtr(), full.valuePtr() + full.nonZeros());
  A.scale = 1.0;
  const double bound = scale > 0.0 ? scale : gershgorin_bound(A);
  if (!(bound > 0.0)) throw IoError(path + ": matrix has no nonzero entries");
  for (auto& v : A.values) v /= bound;
  A.scale = bound;
  return A;
}

double gershgorin_bound(const SparseSpdOperator& A) {
  double g = 0.0;
  for (std::int64_t i = 0; i < A.n; ++i) {
    double s = 0.0;
    for (auto p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) s += std::abs(A.values[p]);
    g = std::max(g, s);
  }
  return g;
}

SpectralOracle::SpectralOracle(const SparseSpdOperator& A) : SpectralOracle(A.kind, A.nx) {}

SpectralOracle::SpectralOracle(OperatorKind kind, std::int64_t n_per_dim) : kind_(kind), n_(n_per_dim) {
  if (kind != OperatorKind::laplace1d && kind != OperatorKind::laplace2d5pt)
    throw BadResolution(std::string("no closed-form spectrum for ") + to_string(kind));
  if (n_ < 1) throw BadResolution("oracle needs at least one interior node");
  size_ = kind == OperatorKind::laplace1d ? n_ : n_ * n_;
}

double SpectralOracle::eigenvalue(std::int64_t flat) const {
  const double h = 1.0 / static_cast<double>(n_ + 1);
  auto s2 = [h](std::int64_t i) {
    const double s = std::sin(static_cast<double>(i) * M_PI * h / 2.0);
    return s * s;
  };
  if (kind_ == OperatorKind::laplace1d) return s2(flat + 1);
  return 0.5 * (s2(flat % n_ + 1) + s2(flat / n_ + 1));
}

double SpectralOracle::eigvec_norm2() const {
  const double one = static_cast<double>(n_ + 1) / 2.0;
  return kind_ == OperatorKind::laplace1d ? one : one * one;
}

std::vector<double> SpectralOracle::eigenvector(std::int64_t flat) const {
  const double h = 1.0 / static_cast<double>(n_ + 1);
  std::vector<double> v(static_cast<std::size_t>(size_));
  if (kind_ == OperatorKind::laplace1d) {
    for (std::int64_t k = 0; k < n_; ++k) v[k] = std::sin(static_cast<double>((flat + 1) * (k + 1)) * M_PI * h);
    return v;
  }
  const std::int64_t i = flat % n_ + 1, j = flat / n_ + 1;
  std::vector<double> sx(n_), sy(n_);
  for (std::int64_t k = 0; k < n_; ++k) {
    sx[k] = std::sin(static_cast<double>(i * (k + 1)) * M_PI * h);
    sy[k] = std::sin(static_cast<double>(j * (k + 1)) * M_PI * h);
  }
  for (std::int64_t y = 0; y < n_; ++y)
    for (std::int64_t x = 0; x < n_; ++x) v[y * n_ + x] = sx[x] * sy[y];
  return v;
}

// RODFT00 computes Y_k = 2 sum_j X_j sin(pi (j+1)(k+1) / (N+1)) per axis, so
// the sine sums are half of it per dimension.  The same transform serves
// analysis and synthesis since the sine matrix is symmetric.
static std::vector<double> sine_transform(const SpectralOracle& o, const std::vector<double>& in) {
  if (static_cast<std::int64_t>(in.size()) != o.size()) throw BadResolution("vector length does not match the oracle");
  std::vector<double> out(in.size());
  std::vector<double> work(in);
  const int n = static_cast<int>(o.n_per_dim());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (o.kind() == OperatorKind::laplace1d)
      plan = fftw_plan_r2r_1d(n, work.data(), out.data(), FFTW_RODFT00, FFTW_ESTIMATE);
    else
      plan = fftw_plan_r2r_2d(n, n, work.data(), out.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double f = o.kind() == OperatorKind::laplace1d ? 0.5 : 0.25;
  for (auto& v : out) v *= f;
  return out;
}

std::vector<double> SpectralOracle::analyze(const std::vector<double>& f) const { return sine_transform(*this, f); }

std::vector<double> SpectralOracle::synthesize(const std::vector<double>& a) const { return sine_transform(*this, a); }

std::vector<double> SpectralOracle::analyze_direct(const std::vector<double>& f) const {
  if (static_cast<std::int64_t>(f.size()) != size_) throw BadResolution("vector length does not match the oracle");
  std::vector<double> a(f.size());
  for (std::int64_t i = 0; i < size_; ++i) {
    const auto psi = eigenvector(i);
    double s = 0.0;
    for (std::int64_t k = 0; k < size_; ++k) s += f[k] * psi[k];
    a[i] = s;
  }
  return a;
}

std::vector<double> SpectralOracle::synthesize_direct(const std::vector<double>& a) const {
  if (static_cast<std::int64_t>(a.size()) != size_) throw BadResolution("vector length does not match the oracle");
  std::vector<double> v(a.size(), 0.0);
  for (std::int64_t i = 0; i < size_; ++i) {
    const auto psi = eigenvector(i);
    for (std::int64_t k = 0; k < size_; ++k) v[k] += a[i] * psi[k];
  }
  return v;
}

std::vector<double> special_rhs(RhsKind kind, const SparseSpdOperator& A, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(A.n);
  switch (kind) {
    case RhsKind::ones: return std::vector<double>(n, 1.0);
    case RhsKind::e1: {
      std::vector<double> v(n, 0.0);
      if (n > 0) v[0] = 1.0;
      return v;
    }
    case RhsKind::checkerboard: {
      if (A.kind != OperatorKind::laplace2d5pt) throw BadResolution("checkerboard right-hand side needs a 2D grid");
      std::vector<double> v(n);
      for (std::int64_t y = 0; y < A.nx; ++y)
        for (std::int64_t x = 0; x < A.nx; ++x) {
          const double px = static_cast<double>(x + 1) * A.h, py = static_cast<double>(y + 1) * A.h;
          v[y * A.nx + x] = (px - 0.5) * (py - 0.5) > 0.0 ? 1.0 : -1.0;
        }
      return v;
    }
    case RhsKind::random_eigen_mix: return random_eigen_mix(SpectralOracle(A), seed);
  }
  return {};
}

std::vector<double> random_eigen_mix(const SpectralOracle& oracle, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> gamma(static_cast<std::size_t>(oracle.size()));
  for (auto& g : gamma) g = u(rng);
  return oracle.synthesize(gamma);
}

std::vector<double> oracle_frac_apply(const SpectralOracle& oracle, double gamma, const std::vector<double>& f) {
  auto a = oracle.analyze(f);
  const double inv_norm2 = 1.0 / oracle.eigvec_norm2();
  for (std::int64_t i = 0; i < oracle.size(); ++i) a[i] *= std::pow(oracle.eigenvalue(i), gamma) * inv_norm2;
  return oracle.synthesize(a);
}

double weighted_norm(const SpectralOracle& oracle, double gamma, const std::vector<double>& v) {
  const auto a = oracle.analyze(v);
  double s = 0.0;
  for (std::int64_t i = 0; i < oracle.size(); ++i) s += std::pow(oracle.eigenvalue(i), gamma) * a[i] * a[i];
  return std::sqrt(s / oracle.eigvec_norm2());
}

}  // namespace bura
