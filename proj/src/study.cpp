#include "mlppde/study.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mlppde/kernels.hpp"
#include "mlppde/oracles.hpp"
#include "mlppde/version.hpp"

namespace mlppde {

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Classic RK4 for u' = f(u), step count doubled until stable to 1e-12.
double ode_exact(const Nonlinearity& f, double u0, double t) {
  auto solve = [&](std::uint64_t steps) {
    const double h = t / static_cast<double>(steps);
    double u = u0;
    for (std::uint64_t i = 0; i < steps; ++i) {
      const double k1 = f(u);
      const double k2 = f(u + 0.5 * h * k1);
      const double k3 = f(u + 0.5 * h * k2);
      const double k4 = f(u + h * k3);
      u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
  };
  double prev = solve(1024);
  for (std::uint64_t n = 2048; n <= (1u << 22); n *= 2) {
    const double cur = solve(n);
    if (std::fabs(cur - prev) <= 1e-12 * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

double resolve_reference(const SemilinearProblem& problem, const StudyConfig& cfg) {
  const std::string& ref = cfg.reference;
  if (ref.rfind("const:", 0) == 0) {
    try {
      return std::stod(ref.substr(6));
    } catch (const std::exception&) {
      throw std::invalid_argument("reference: cannot parse '" + ref + "'");
    }
  }
  if (ref == "quadrature") {
    if (problem.dimension != 1)
      throw std::invalid_argument("reference: quadrature oracle requires d = 1");
    const QuadratureSolution sol = quadrature_fixed_point_1d(problem);
    if (!sol.converged)
      throw std::runtime_error("reference: quadrature oracle did not converge (residual " +
                               fmt_g17(sol.residual) + ")");
    return sol.value_at(cfg.t, cfg.x.at(0));
  }
  if (ref == "ode-exact") {
    if (problem.initial_value.kind != GFunction::Kind::Constant)
      throw std::invalid_argument("reference: ode-exact requires a constant g");
    return ode_exact(problem.nonlinearity, problem.initial_value.constant, cfg.t);
  }
  if (ref.rfind("feynman-kac:", 0) == 0) {
    std::uint64_t samples = 0;
    try {
      samples = std::stoull(ref.substr(12));
    } catch (const std::exception&) {
      throw std::invalid_argument("reference: cannot parse sample count in '" + ref + "'");
    }
    CostLedger led;
    const StreamKey key = StreamKey::root(cfg.root_seed).child(-1);
    return feynman_kac(problem, cfg.t, cfg.x, samples, key, led).mean;
  }
  if (ref.rfind("self:n=M=", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(ref.substr(9));
    } catch (const std::exception&) {
      throw std::invalid_argument("reference: cannot parse level in '" + ref + "'");
    }
    const MlpLevel level{k, static_cast<std::uint64_t>(k)};
    double acc = 0.0;
    for (int s = 0; s < cfg.seeds; ++s) {
      CostLedger led;
      const StreamKey key = StreamKey::root(cfg.root_seed).child(-2).child(s);
      acc += mlp_estimate(problem, cfg.t, cfg.x, level, key, led, cfg.mlp);
    }
    return acc / cfg.seeds;
  }
  throw std::invalid_argument("reference: unknown spec '" + ref + "'");
}

double running_slope(const std::vector<StudySummaryRow>& summary, std::size_t upto) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i <= upto; ++i)
    if (summary[i].rmse > 0.0 && summary[i].mean_cost_total > 0.0)
      pts.emplace_back(summary[i].mean_cost_total, summary[i].rmse);
  if (pts.size() < 3) return std::nan("");
  return fit_rate(pts).slope;
}

} // namespace

StudyResult run_study(const SemilinearProblem& problem, const StudyConfig& config) {
  problem.validate();
  StudyConfig cfg = config;
  if (cfg.levels.empty())
    for (int k = 1; k <= 5; ++k) cfg.levels.push_back({k, static_cast<std::uint64_t>(k)});
  if (cfg.seeds < 2) throw std::invalid_argument("study: need seeds >= 2");
  if (cfg.x.size() != static_cast<std::size_t>(problem.dimension))
    throw std::invalid_argument("study: evaluation point has wrong dimension");

  StudyResult result;
  result.config = cfg;
  result.reference_value = resolve_reference(problem, cfg);
  if (!std::isfinite(result.reference_value))
    throw std::runtime_error("study: reference value is not finite");

  const std::size_t cells = cfg.levels.size() * static_cast<std::size_t>(cfg.seeds);
  result.rows.resize(cells);

  const StreamKey root = StreamKey::root(cfg.root_seed);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto worker = [&]() {
    try {
      for (std::size_t c = next.fetch_add(1); c < cells; c = next.fetch_add(1)) {
        const std::size_t li = c / cfg.seeds;
        const int seed = static_cast<int>(c % cfg.seeds);
        StudyRow row;
        row.level = cfg.levels[li];
        row.seed = seed;
        row.reference = result.reference_value;
        const StreamKey key = root.child(static_cast<std::int64_t>(li)).child(seed);
        const auto t0 = std::chrono::steady_clock::now();
        row.estimate = mlp_estimate(problem, cfg.t, cfg.x, row.level, key, row.ledger, cfg.mlp);
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.abs_error = std::fabs(row.estimate - row.reference);
        result.rows[c] = row;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  };
  const int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  result.summary.resize(cfg.levels.size());
  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    double sq = 0.0, cost = 0.0;
    for (int s = 0; s < cfg.seeds; ++s) {
      const StudyRow& row = result.rows[li * cfg.seeds + s];
      sq += row.abs_error * row.abs_error;
      cost += static_cast<double>(row.ledger.total());
    }
    StudySummaryRow& sr = result.summary[li];
    sr.level = cfg.levels[li];
    sr.rmse = std::sqrt(sq / cfg.seeds);
    sr.mean_cost_total = cost / cfg.seeds;
  }
  for (std::size_t li = 0; li < result.summary.size(); ++li)
    result.summary[li].slope_fit_running = running_slope(result.summary, li);
  return result;
}

RateFit fit_rate(std::span<const std::pair<double, double>> cost_rmse) {
  if (cost_rmse.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 points");
  const std::size_t n = cost_rmse.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cost_rmse[i].first > 0.0) || !(cost_rmse[i].second > 0.0))
      throw std::invalid_argument("fit_rate: points must have positive cost and rmse");
    lx[i] = std::log(cost_rmse[i].first);
    ly[i] = std::log(cost_rmse[i].second);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all costs identical");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

CostVerifyReport verify_cost_model(std::span<const MlpLevel> levels, int dimension) {
  SemilinearProblem p;
  p.dimension = dimension;
  p.horizon = 1.0;
  p.diffusion = ScaledHeat{};
  p.nonlinearity = Nonlinearity::linear(1.0);
  p.initial_value = GFunction::from_name("sum");
  p.id = "cost-verify";

  const std::vector<double> x(dimension, 0.0);
  const StreamKey key = StreamKey::root(12345);

  CostVerifyReport report;
  report.dimension = dimension;
  report.pass = true;
  for (const MlpLevel& level : levels) {
    CostVerifyRow row;
    row.level = level;
    row.predicted = predict_cost(level, dimension);
    mlp_estimate(p, 0.5, x, level, key.child(level.n).child(static_cast<std::int64_t>(level.M)),
                 row.measured);
    row.pass = row.measured == row.predicted;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

void write_meta(const SemilinearProblem& problem, const StudyResult& r, std::ostream& out) {
  const StudyConfig& c = r.config;
  out << "# mlppde study v" << kVersion << "\n";
  out << "# build=" << build_id() << "\n";
  out << "# backend=" << kern::active().name << "\n";
  out << "# problem=" << (c.problem_id.empty() ? problem.id : c.problem_id)
      << " diffusion=" << diffusion_name(problem.diffusion) << " d=" << problem.dimension
      << " T=" << fmt_g17(problem.horizon) << " f=" << problem.nonlinearity.name
      << " g=" << problem.initial_value.name << "\n";
  if (!is_heat(problem.diffusion))
    out << "# note=diffusion extends the heat-kernel setting of the cost/error analysis\n";
  out << "# t=" << fmt_g17(c.t) << " x=";
  for (std::size_t i = 0; i < c.x.size(); ++i) out << (i ? "," : "") << fmt_g17(c.x[i]);
  out << "\n";
  out << "# seeds=" << c.seeds << " root_seed=" << c.root_seed << " threads=" << c.threads
      << "\n";
  out << "# reference=" << c.reference << " reference_value=" << fmt_g17(r.reference_value)
      << "\n";
  if (c.reference.rfind("self:", 0) == 0)
    out << "# note=reference is self-referential (high-level MLP mean), not an oracle\n";
}

} // namespace

void write_study_rows_csv(const SemilinearProblem& problem, const StudyResult& r,
                          std::ostream& out) {
  write_meta(problem, r, out);
  out << "problem,d,T,t,n,M,seed,estimate,reference,abs_error,f_evals,g_evals,scalar_draws,"
         "wall_ms\n";
  const std::string pid = r.config.problem_id.empty() ? problem.id : r.config.problem_id;
  for (const StudyRow& row : r.rows) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", row.wall_ms);
    out << pid << ',' << problem.dimension << ',' << fmt_g17(problem.horizon) << ','
        << fmt_g17(r.config.t) << ',' << row.level.n << ',' << row.level.M << ',' << row.seed
        << ',' << fmt_g17(row.estimate) << ',' << fmt_g17(row.reference) << ','
        << fmt_g17(row.abs_error) << ',' << row.ledger.f_evals << ',' << row.ledger.g_evals
        << ',' << row.ledger.scalar_draws << ',' << wall << "\n";
  }
}

void write_study_summary_csv(const SemilinearProblem& problem, const StudyResult& r,
                             std::ostream& out) {
  write_meta(problem, r, out);
  out << "n,M,rmse,mean_cost_total,slope_fit_running\n";
  for (const StudySummaryRow& s : r.summary)
    out << s.level.n << ',' << s.level.M << ',' << fmt_g17(s.rmse) << ','
        << fmt_g17(s.mean_cost_total) << ',' << fmt_g17(s.slope_fit_running) << "\n";
}

std::vector<std::pair<double, double>> read_summary_points(std::istream& in) {
  std::vector<std::pair<double, double>> pts;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true; // column header
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 4) continue;
    try {
      pts.emplace_back(std::stod(fields[3]), std::stod(fields[2]));
    } catch (const std::exception&) {
      throw std::runtime_error("summary csv: cannot parse line '" + line + "'");
    }
  }
  return pts;
}

} // namespace mlppde
