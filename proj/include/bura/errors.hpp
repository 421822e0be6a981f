#pragma once

#include <stdexcept>
#include <string>

namespace bura {

/// Coarse failure classes; the CLI maps them onto process exit codes.
enum class ErrorKind {
  numeric,      // singular systems, diverged polishing, bad input ranges
  convergence,  // Remez or an iterative solver ran out of iterations
  invariant,    // a structural check on a result failed
  io,           // files, caches, parse errors
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define BURA_DEFINE_ERROR(Name, Kind)                                      \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

// xnum
BURA_DEFINE_ERROR(SingularMatrix, numeric)
BURA_DEFINE_ERROR(RootPolishDiverged, numeric)
// remez
BURA_DEFINE_ERROR(InnerDiverged, numeric)
BURA_DEFINE_ERROR(BadReference, numeric)
BURA_DEFINE_ERROR(AlternationLost, numeric)
BURA_DEFINE_ERROR(BadParameters, numeric)
// decomp
BURA_DEFINE_ERROR(ComplexPolesDetected, invariant)
BURA_DEFINE_ERROR(InterlacingViolated, invariant)
BURA_DEFINE_ERROR(InvariantViolated, invariant)
// operators / solvers
BURA_DEFINE_ERROR(BadResolution, numeric)
BURA_DEFINE_ERROR(MethodMismatch, numeric)
BURA_DEFINE_ERROR(BadArity, numeric)
// harness
BURA_DEFINE_ERROR(UnknownExperiment, io)
BURA_DEFINE_ERROR(CacheMiss, io)
BURA_DEFINE_ERROR(CacheCorrupt, invariant)
BURA_DEFINE_ERROR(IoError, io)

#undef BURA_DEFINE_ERROR

class NonConvergence : public Error {
 public:
  NonConvergence(int iterations, double last_spread, const std::string& detail)
      : Error(ErrorKind::convergence, "Remez did not converge after " + std::to_string(iterations) +
                                          " iterations (spread " + std::to_string(last_spread) + ")" +
                                          (detail.empty() ? "" : ": " + detail)),
        iterations_(iterations),
        last_spread_(last_spread) {}
  int iterations() const noexcept { return iterations_; }
  double last_spread() const noexcept { return last_spread_; }

 private:
  int iterations_;
  double last_spread_;
};

class IdentityCheckFailed : public Error {
 public:
  IdentityCheckFailed(std::string which, double deviation)
      : Error(ErrorKind::invariant,
              "partial fraction identity '" + which + "' violated (deviation " + std::to_string(deviation) + ")"),
        which_(std::move(which)) {}
  const std::string& which() const noexcept { return which_; }

 private:
  std::string which_;
};

class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(int iterations, double residual, const std::string& context = {})
      : Error(ErrorKind::convergence, "iterative solver hit " + std::to_string(iterations) +
                                      " iterations, relative residual " + std::to_string(residual) +
                                      (context.empty() ? "" : " [" + context + "]")),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace bura
