#pragma once

#include <cmath>
#include <map>
#include <tuple>

#include "bura/decomp.hpp"
#include "bura/remez.hpp"

namespace testing {

// Approximants are expensive; every test binary computes each one once.
inline const bura::RationalApproximant& approx(double alpha, int beta, int m, int k) {
  static std::map<std::tuple<double, int, int, int>, bura::RationalApproximant> memo;
  const auto key = std::make_tuple(alpha, beta, m, k);
  auto it = memo.find(key);
  if (it == memo.end()) it = memo.emplace(key, bura::compute_bura(alpha, beta, m, k)).first;
  return it->second;
}

inline const bura::PartialFractionForm& pform(double alpha, int beta, int m, int k) {
  static std::map<std::tuple<double, int, int, int>, bura::PartialFractionForm> memo;
  const auto key = std::make_tuple(alpha, beta, m, k);
  auto it = memo.find(key);
  if (it == memo.end()) it = memo.emplace(key, bura::to_partial_fractions(approx(alpha, beta, m, k))).first;
  return it->second;
}

inline double rel_dev(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace testing
