#include "bura/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace bura::kernels {

namespace {

constexpr std::int64_t kBlock = 4096;

std::int64_t len(const std::vector<double>& v) { return static_cast<std::int64_t>(v.size()); }

double dot_serial(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Fixed block partition; only the work distribution is threaded.
double dot_blocked(const std::vector<double>& x, const std::vector<double>& y) {
  const std::int64_t n = len(x);
  const std::int64_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> part(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::int64_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += x[i] * y[i];
    part[b] = s;
  }
  double s = 0.0;
  for (double p : part) s += p;
  return s;
}

}  // namespace

void spmv(const SparseSpdOperator& A, double shift, const std::vector<double>& x, std::vector<double>& y, Exec exec) {
  const std::int64_t n = A.n;
  y.resize(static_cast<std::size_t>(n));
  const auto* rp = A.row_ptr.data();
  const auto* ci = A.col_idx.data();
  const auto* va = A.values.data();
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) {
      double s = -shift * x[i];
      for (auto p = rp[i]; p < rp[i + 1]; ++p) s += va[p] * x[ci[p]];
      y[i] = s;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = -shift * x[i];
    for (auto p = rp[i]; p < rp[i + 1]; ++p) s += va[p] * x[ci[p]];
    y[i] = s;
  }
}

double dot(const std::vector<double>& x, const std::vector<double>& y, Exec exec) {
  return exec == Exec::serial ? dot_serial(x, y) : dot_blocked(x, y);
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y, Exec exec) {
  const std::int64_t n = len(x);
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(const std::vector<double>& x, double b, std::vector<double>& y, Exec exec) {
  const std::int64_t n = len(x);
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void scale_by(const std::vector<double>& d, const std::vector<double>& r, std::vector<double>& z, Exec exec) {
  const std::int64_t n = len(r);
  z.resize(r.size());
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
}

double norm2(const std::vector<double>& x, Exec exec) { return std::sqrt(dot(x, x, exec)); }

}  // namespace bura::kernels
