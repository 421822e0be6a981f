#pragma once

#include <vector>

#include "bura/operators.hpp"

namespace bura {

/// Vector kernels behind the iterative solvers.  The parallel versions use
/// OpenMP; the serial ones are the plain loops they are tested against.
/// Reductions are summed per fixed-size block and the block sums are then
/// added in order, so results do not depend on the thread count.
enum class Exec { serial, parallel };

namespace kernels {

/// y = (A - shift I) x
void spmv(const SparseSpdOperator& A, double shift, const std::vector<double>& x, std::vector<double>& y,
          Exec exec = Exec::parallel);
double dot(const std::vector<double>& x, const std::vector<double>& y, Exec exec = Exec::parallel);
/// y += a x
void axpy(double a, const std::vector<double>& x, std::vector<double>& y, Exec exec = Exec::parallel);
/// y = x + b y
void xpby(const std::vector<double>& x, double b, std::vector<double>& y, Exec exec = Exec::parallel);
/// z = d .* r
void scale_by(const std::vector<double>& d, const std::vector<double>& r, std::vector<double>& z,
              Exec exec = Exec::parallel);
double norm2(const std::vector<double>& x, Exec exec = Exec::parallel);

}  // namespace kernels
}  // namespace bura
