#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>
#include <vector>

#include "mlppde/oracles.hpp"
#include "mlppde/study.hpp"

using namespace mlppde;

namespace {

SemilinearProblem make(int d, double T, Nonlinearity f, GFunction g, std::string id) {
  SemilinearProblem p;
  p.dimension = d;
  p.horizon = T;
  p.nonlinearity = std::move(f);
  p.initial_value = std::move(g);
  p.id = std::move(id);
  return p;
}

} // namespace

TEST_CASE("fit_rate recovers exact power laws") {
  std::vector<std::pair<double, double>> pts;
  for (double c : {10.0, 100.0, 1000.0}) pts.emplace_back(c, std::pow(c, -0.5));
  RateFit fit = fit_rate(pts);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  pts.clear();
  for (double c : {7.0, 55.0, 210.0, 9000.0}) pts.emplace_back(c, 3.0 * std::pow(c, -1.0 / 3.0));
  fit = fit_rate(pts);
  CHECK(fit.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("fit_rate rejects deficient inputs") {
  std::vector<std::pair<double, double>> two{{10.0, 1.0}, {100.0, 0.5}};
  CHECK_THROWS_AS(fit_rate(two), std::invalid_argument);
  std::vector<std::pair<double, double>> bad{{10.0, 1.0}, {100.0, 0.0}, {1000.0, 0.1}};
  CHECK_THROWS_AS(fit_rate(bad), std::invalid_argument);
  std::vector<std::pair<double, double>> neg{{10.0, 1.0}, {-100.0, 0.5}, {1000.0, 0.1}};
  CHECK_THROWS_AS(fit_rate(neg), std::invalid_argument);
}

TEST_CASE("degenerate study has zero RMSE at every level") {
  auto p = make(2, 1.0, Nonlinearity::zero(), GFunction::constant_g(3.0), "degenerate");
  StudyConfig cfg;
  cfg.t = 1.0;
  cfg.x = {0.0, 0.0};
  cfg.levels = {{1, 2}, {2, 2}, {3, 3}};
  cfg.seeds = 4;
  cfg.reference = "const:3";
  cfg.root_seed = 11;
  const StudyResult r = run_study(p, cfg);
  for (const auto& s : r.summary) CHECK(s.rmse == 0.0);
  for (const auto& row : r.rows) CHECK(row.estimate == 3.0);
}

TEST_CASE("study rejects invalid configs") {
  auto p = make(1, 1.0, Nonlinearity::zero(), GFunction::constant_g(0.0), "x");
  StudyConfig cfg;
  cfg.x = {0.0};
  cfg.seeds = 1;
  CHECK_THROWS_AS(run_study(p, cfg), std::invalid_argument);
  cfg.seeds = 2;
  cfg.reference = "unknown-oracle";
  CHECK_THROWS_AS(run_study(p, cfg), std::invalid_argument);
}

TEST_CASE("bias shrinks from n=1 to n=4 against the exact exponential") {
  // f(u) = u, g = 1: u(1) = e. The n = 1 estimator has mean 1; n = 4 has
  // mean 1 + 1 + 1/2 + 1/6.
  auto p = make(1, 1.0, Nonlinearity::linear(1.0), GFunction::constant_g(1.0), "exp");
  StudyConfig cfg;
  cfg.t = 1.0;
  cfg.x = {0.0};
  cfg.levels = {{1, 2}, {4, 4}};
  cfg.seeds = 20;
  cfg.reference = "ode-exact";
  cfg.root_seed = 7;
  const StudyResult r = run_study(p, cfg);
  CHECK(r.reference_value == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(r.summary[1].rmse < r.summary[0].rmse);
}

TEST_CASE("study tables are reproducible and self-consistent") {
  auto p = make(1, 0.5, Nonlinearity::allen_cahn(true), GFunction::constant_g(0.4), "repro");
  StudyConfig cfg;
  cfg.t = 0.5;
  cfg.x = {0.0};
  cfg.levels = {{2, 2}, {3, 2}};
  cfg.seeds = 6;
  cfg.reference = "const:0.4";
  cfg.root_seed = 99;
  cfg.threads = 2;
  const StudyResult a = run_study(p, cfg);
  const StudyResult b = run_study(p, cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].estimate == b.rows[i].estimate);
    CHECK(a.rows[i].abs_error == b.rows[i].abs_error);
    CHECK(a.rows[i].ledger == b.rows[i].ledger);
  }
  // RMSE recomputed from rows matches the summary
  for (std::size_t li = 0; li < a.summary.size(); ++li) {
    double sq = 0.0;
    for (int s = 0; s < cfg.seeds; ++s) {
      const double e = a.rows[li * cfg.seeds + s].abs_error;
      sq += e * e;
    }
    const double rmse = std::sqrt(sq / cfg.seeds);
    CHECK(std::fabs(rmse - a.summary[li].rmse) <= 1e-15 * std::max(1.0, rmse));
  }
  // abs_error column is recomputable from estimate and reference
  for (const auto& row : a.rows)
    CHECK(row.abs_error == std::fabs(row.estimate - row.reference));
}

TEST_CASE("csv writers emit the normative headers and parse back") {
  auto p = make(1, 1.0, Nonlinearity::zero(), GFunction::constant_g(1.0), "csv");
  StudyConfig cfg;
  cfg.t = 1.0;
  cfg.x = {0.0};
  cfg.levels = {{1, 1}, {2, 2}, {3, 3}};
  cfg.seeds = 3;
  cfg.reference = "const:1";
  const StudyResult r = run_study(p, cfg);

  std::ostringstream rows;
  write_study_rows_csv(p, r, rows);
  const std::string rows_text = rows.str();
  CHECK(rows_text.find("problem,d,T,t,n,M,seed,estimate,reference,abs_error,f_evals,g_evals,"
                       "scalar_draws,wall_ms\n") != std::string::npos);
  CHECK(rows_text.find("# ") == 0);

  std::ostringstream sum;
  write_study_summary_csv(p, r, sum);
  CHECK(sum.str().find("n,M,rmse,mean_cost_total,slope_fit_running\n") != std::string::npos);

  std::istringstream in(sum.str());
  const auto pts = read_summary_points(in);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].first == doctest::Approx(static_cast<double>(predict_cost({1, 1}, 1).total())));
}

TEST_CASE("verify_cost_model passes on the standard grid") {
  std::vector<MlpLevel> levels;
  for (int k = 0; k <= 3; ++k) levels.push_back({k, static_cast<std::uint64_t>(std::max(k, 1))});
  for (int d : {1, 10}) {
    const CostVerifyReport rep = verify_cost_model(levels, d);
    CHECK(rep.pass);
    for (const auto& row : rep.rows) CHECK(row.pass);
  }
}

TEST_CASE("self-referential reference resolves to a high-level mean") {
  auto p = make(1, 0.5, Nonlinearity::allen_cahn(true), GFunction::constant_g(0.3), "self");
  StudyConfig cfg;
  cfg.t = 0.5;
  cfg.x = {0.0};
  cfg.levels = {{1, 2}, {2, 2}};
  cfg.seeds = 5;
  cfg.reference = "self:n=M=3";
  cfg.root_seed = 3;
  const StudyResult r = run_study(p, cfg);
  CHECK(std::isfinite(r.reference_value));
  // the self reference must not collide with any study cell estimate stream
  for (const auto& row : r.rows) CHECK(row.reference == r.reference_value);
}

TEST_CASE("cross-oracle agreement on the 1-d reaction-diffusion benchmark") {
  SemilinearProblem p;
  p.dimension = 1;
  p.horizon = 0.3;
  p.nonlinearity = Nonlinearity::allen_cahn(true);
  p.initial_value = GFunction::custom(
      "half_gauss", [](std::span<const double> x) { return 0.5 * std::exp(-x[0] * x[0]); });
  p.id = "cross";

  QuadratureGrid grid;
  grid.time_steps = 24;
  grid.space_points = 401;
  grid.space_radius = 12.0;
  const QuadratureSolution sol = quadrature_fixed_point_1d(p, grid);
  REQUIRE(sol.converged);
  const double ref = sol.value_at(0.3, 0.0);

  const std::vector<double> x{0.0};
  const int seeds = 20;
  std::vector<double> estimates(seeds);
  double mean = 0.0;
  for (int s = 0; s < seeds; ++s) {
    CostLedger led;
    estimates[s] =
        mlp_estimate(p, 0.3, x, {5, 5}, StreamKey::root(424242).child(s), led);
    mean += estimates[s];
  }
  mean /= seeds;
  double sd = 0.0;
  for (double e : estimates) sd += (e - mean) * (e - mean);
  sd = std::sqrt(sd / (seeds - 1));
  CHECK(std::fabs(mean - ref) < 3.0 * sd);
}
