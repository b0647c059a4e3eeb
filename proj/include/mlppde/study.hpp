#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlppde/mlp.hpp"
#include "mlppde/problem.hpp"

// Convergence studies: sweep (level, seed) cells, compare against a chosen
// reference, and fit the empirical error-vs-cost exponent.

namespace mlppde {

struct StudyConfig {
  std::string problem_id;
  double t = 1.0;
  std::vector<double> x;
  std::vector<MlpLevel> levels; // default: diagonal n = M in {1..5}
  int seeds = 20;
  // "const:<v>" | "quadrature" | "ode-exact" | "feynman-kac:<samples>" |
  // "self:n=M=<k>"
  std::string reference = "const:0";
  std::string output_path;
  std::uint64_t root_seed = 0;
  int threads = 1;
  MlpOptions mlp;
};

struct StudyRow {
  MlpLevel level;
  int seed = 0;
  double estimate = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
  CostLedger ledger;
  double wall_ms = 0.0;
};

struct StudySummaryRow {
  MlpLevel level;
  double rmse = 0.0;
  double mean_cost_total = 0.0;
  double slope_fit_running = 0.0; // NaN until 3 levels are available
};

struct StudyResult {
  StudyConfig config;
  double reference_value = 0.0;
  std::vector<StudyRow> rows;
  std::vector<StudySummaryRow> summary;
};

StudyResult run_study(const SemilinearProblem& problem, const StudyConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(rmse) against log(cost); needs >= 3 points with
/// strictly positive coordinates.
RateFit fit_rate(std::span<const std::pair<double, double>> cost_rmse);

struct CostVerifyRow {
  MlpLevel level;
  CostLedger measured;
  CostLedger predicted;
  bool pass = false;
};

struct CostVerifyReport {
  int dimension = 0;
  std::vector<CostVerifyRow> rows;
  bool pass = false;
};

/// Runs one instrumented estimate per level; PASS iff the measured ledger
/// equals predict_cost exactly everywhere.
CostVerifyReport verify_cost_model(std::span<const MlpLevel> levels, int dimension);

/// Normative CSV formats. Row header:
///   problem,d,T,t,n,M,seed,estimate,reference,abs_error,f_evals,g_evals,scalar_draws,wall_ms
/// Summary header:
///   n,M,rmse,mean_cost_total,slope_fit_running
void write_study_rows_csv(const SemilinearProblem& problem, const StudyResult& result,
                          std::ostream& out);
void write_study_summary_csv(const SemilinearProblem& problem, const StudyResult& result,
                             std::ostream& out);

/// Parses a summary CSV back into (cost, rmse) points (skips '#' comments).
std::vector<std::pair<double, double>> read_summary_points(std::istream& in);

} // namespace mlppde
