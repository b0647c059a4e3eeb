#pragma once

#include <cstdint>

namespace mlppde {

/// Work counters for one solver run: evaluations of the nonlinearity f,
/// evaluations of the initial-value function g, and realizations of scalar
/// random variables (a d-dimensional Gaussian draw counts d, a uniform 1).
struct CostLedger {
  std::uint64_t f_evals = 0;
  std::uint64_t g_evals = 0;
  std::uint64_t scalar_draws = 0;

  CostLedger& operator+=(const CostLedger& other) {
    f_evals += other.f_evals;
    g_evals += other.g_evals;
    scalar_draws += other.scalar_draws;
    return *this;
  }

  friend CostLedger operator+(CostLedger a, const CostLedger& b) { return a += b; }
  friend bool operator==(const CostLedger&, const CostLedger&) = default;

  std::uint64_t total() const { return f_evals + g_evals + scalar_draws; }
};

} // namespace mlppde
