#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlppde/ledger.hpp"
#include "mlppde/problem.hpp"
#include "mlppde/streams.hpp"

// Full-history-recursive multilevel Picard estimator. The estimator value
// for a given (problem, t, x, level, key) is a pure function: all
// randomness is keyed, accumulation uses a fixed centered blocked pairwise
// scheme, so serial and multithreaded evaluation produce bit-identical
// values and ledgers.

namespace mlppde {

/// Picard depth n and Monte Carlo base M. Level-k sums use M^(n-k) samples.
struct MlpLevel {
  int n = 1;
  std::uint64_t M = 1;
};

struct MlpOptions {
  int depth_guard = 10;  // refuse n beyond this (M^n cost is super-exponential)
  bool hoist_f0 = false; // evaluate f(0) once instead of once per terminal summand
};

struct EstimateRecord {
  double value = 0.0;
  MlpLevel level;
  CostLedger ledger;
  double wall_time_s = 0.0;
  std::uint64_t root_seed = 0;
  std::string problem_id;
  double t = 0.0;
  std::vector<double> x;
  int threads = 1;
};

/// One realization of the level-(n,M) estimator at (t, x) under `key`.
/// n = 0 returns 0 without consuming randomness.
double mlp_estimate(const SemilinearProblem& problem, double t, std::span<const double> x,
                    MlpLevel level, const StreamKey& key, CostLedger& ledger,
                    const MlpOptions& options = {});

/// Same value and ledger as mlp_estimate for the same key, computed with
/// `threads` workers over the outer summands.
EstimateRecord mlp_estimate_parallel(const SemilinearProblem& problem, double t,
                                     std::span<const double> x, MlpLevel level,
                                     const StreamKey& key, int threads,
                                     const MlpOptions& options = {});

/// Analytic cost of one estimator realization; must match the measured
/// ledger exactly. Throws on 64-bit counter overflow.
CostLedger predict_cost(MlpLevel level, int dimension);

/// Diagonal schedule n = M = ceil(log(1/eps)) + 1 (heuristic stand-in for
/// the theorem's existential schedule).
MlpLevel theorem_schedule(double epsilon);

} // namespace mlppde
