#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "bura/decomp.hpp"
#include "bura/remez.hpp"

namespace bura {

struct CoefficientCacheEntry {
  RationalApproximant r;
  /// Absent when the approximant has no real negative simple poles; the
  /// reason is kept in decomposition_error.
  std::optional<PartialFractionForm> pf;
  std::string decomposition_error;
  /// Leveling tolerance the approximant was computed with.
  double delta_rel = 1e-3;
  std::string tool_version;
};

/// One JSON file per (alpha, beta, m, k, bits).  Multiprecision values are
/// stored as decimal strings with bits/3 + 2 significant digits, enough to
/// reproduce the binary value exactly.
class CoefficientCache {
 public:
  explicit CoefficientCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file_for(double alpha, int beta, int m, int k, mpfr_prec_t bits) const;

  /// Writes to a temporary file in the cache directory, then renames it into
  /// place.  Throws IoError.
  void put(const CoefficientCacheEntry& e) const;

  /// Throws CacheMiss when no file exists, CacheCorrupt when the file does
  /// not parse or the reloaded coefficients fail their invariants.
  CoefficientCacheEntry get(double alpha, int beta, int m, int k, mpfr_prec_t bits) const;

  /// get, or compute_bura plus to_partial_fractions and put on a miss.  A
  /// corrupt entry is recomputed and overwritten.
  CoefficientCacheEntry get_or_compute(double alpha, int beta, int m, int k, const RemezConfig& cfg = {}) const;

 private:
  std::filesystem::path dir_;
};

/// Builds an entry from a converged approximant, decomposing it when the
/// pole structure allows.
CoefficientCacheEntry make_cache_entry(RationalApproximant r, double delta_rel);

/// The full-precision rows of a cache file, in the order they are written.
std::string cache_entry_to_json(const CoefficientCacheEntry& e);
CoefficientCacheEntry cache_entry_from_json(const std::string& text);

extern const char* const kToolVersion;

}  // namespace bura
