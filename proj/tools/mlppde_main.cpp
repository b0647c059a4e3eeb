// Command-line front end: solve / study / rate / verify-cost / oracle.
// All diagnostics go to stderr as a single "error: ..." line with nonzero
// exit status; data goes to stdout or the requested files.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mlppde/kernels.hpp"
#include "mlppde/mlp.hpp"
#include "mlppde/oracles.hpp"
#include "mlppde/problem.hpp"
#include "mlppde/streams.hpp"
#include "mlppde/study.hpp"
#include "mlppde/version.hpp"

namespace {

using namespace mlppde;

struct ProblemFlags {
  std::string problem = "heat";
  double mu = 0.0;
  double sigma = 0.2;
  int d = 1;
  double T = 1.0;
  std::string f = "zero";
  std::string g = "constant:0";
  double t = -1.0; // default: T
  std::string x = "0";
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& pf) {
  cmd->add_option("--problem", pf.problem, "Diffusion model: heat | gbm")
      ->check(CLI::IsMember({"heat", "gbm"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--mu", pf.mu, "GBM drift")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--sigma", pf.sigma, "GBM volatility")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--d", pf.d, "PDE dimension (>= 1)")
      ->check(CLI::Range(1, 1 << 30).description("d >= 1"))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--T", pf.T, "Time horizon (> 0)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--f", pf.f,
                  "Nonlinearity: zero | linear:<a> | allen-cahn | allen-cahn-clamped | "
                  "default-risk:<delta>:<R>:<gh>:<gl>:<vh>:<vl>")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--g", pf.g,
                  "Initial value: constant:<c> | sum | norm_sq | log_half_one_plus_normsq | "
                  "min_coord")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--t", pf.t, "Evaluation time (default: T)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--x", pf.x, "Evaluation point: 0 | const:<v> | v1,v2,...")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

SemilinearProblem build_problem(const ProblemFlags& pf) {
  SemilinearProblem p;
  p.dimension = pf.d;
  p.horizon = pf.T;
  if (pf.problem == "heat") {
    p.diffusion = ScaledHeat{};
  } else {
    p.diffusion = GeometricBm{pf.mu, pf.sigma};
  }
  p.nonlinearity = Nonlinearity::from_name(pf.f);
  p.initial_value = GFunction::from_name(pf.g);
  p.id = pf.problem + ":" + pf.f + ":" + pf.g;
  p.validate();
  return p;
}

std::vector<double> parse_point(const std::string& spec, int d) {
  std::vector<double> x;
  if (spec == "0") {
    x.assign(d, 0.0);
    return x;
  }
  if (spec.rfind("const:", 0) == 0) {
    x.assign(d, std::stod(spec.substr(6)));
    return x;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) x.push_back(std::stod(item));
  if (x.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("x: expected " + std::to_string(d) + " coordinates, got " +
                                std::to_string(x.size()));
  return x;
}

std::vector<MlpLevel> parse_levels(const std::string& spec) {
  std::vector<MlpLevel> levels;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto xpos = item.find('x');
    if (xpos == std::string::npos) {
      const int k = std::stoi(item);
      levels.push_back({k, static_cast<std::uint64_t>(k)});
    } else {
      levels.push_back({std::stoi(item.substr(0, xpos)),
                        static_cast<std::uint64_t>(std::stoull(item.substr(xpos + 1)))});
    }
  }
  if (levels.empty()) throw std::invalid_argument("levels: empty list");
  return levels;
}

void echo_config(std::ostream& out, const ProblemFlags& pf, const SemilinearProblem& p,
                 std::uint64_t seed, int threads) {
  out << "# mlppde v" << kVersion << " build=" << build_id()
      << " backend=" << kern::active().name << "\n";
  out << "# problem=" << pf.problem << " d=" << p.dimension << " T=" << p.horizon
      << " f=" << p.nonlinearity.name << " g=" << p.initial_value.name << "\n";
  if (!is_heat(p.diffusion))
    out << "# note=gbm diffusion extends the heat-kernel setting of the cost/error analysis\n";
  out << "# root_seed=" << seed << " threads=" << threads << "\n";
}

// Flat key=value config file, '#' comments. Values are injected as
// --key=value arguments ahead of the explicit flags, so the command line
// wins. Unknown keys are rejected by name.
std::vector<std::string> load_config_file(const std::string& path, const CLI::App* cmd) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto notspace = line.find_first_not_of(" \t\r\n");
    if (notspace == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      const auto e = s.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) + " has empty key");
    const std::string opt = "--" + key;
    if (!cmd->get_option_no_throw(opt))
      throw std::runtime_error("config: unknown key '" + key + "'");
    args.push_back(opt + "=" + value);
  }
  return args;
}

int cmd_solve(const ProblemFlags& pf, int n, std::uint64_t M, std::uint64_t seed, int threads,
              bool hoist_f0) {
  const SemilinearProblem p = build_problem(pf);
  const double t = pf.t < 0 ? p.horizon : pf.t;
  const std::vector<double> x = parse_point(pf.x, p.dimension);
  MlpOptions opt;
  opt.hoist_f0 = hoist_f0;
  const EstimateRecord rec =
      mlp_estimate_parallel(p, t, x, {n, M}, StreamKey::root(seed), threads, opt);
  echo_config(std::cout, pf, p, seed, threads);
  std::cout << "# t=" << t << " n=" << n << " M=" << M << "\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", rec.value);
  std::cout << "estimate=" << buf << "\n";
  std::cout << "f_evals=" << rec.ledger.f_evals << "\n";
  std::cout << "g_evals=" << rec.ledger.g_evals << "\n";
  std::cout << "scalar_draws=" << rec.ledger.scalar_draws << "\n";
  std::snprintf(buf, sizeof buf, "%.3f", rec.wall_time_s * 1e3);
  std::cout << "wall_ms=" << buf << "\n";
  return 0;
}

int cmd_study(const ProblemFlags& pf, const std::string& levels_spec, int seeds,
              const std::string& reference, const std::string& output,
              const std::string& summary_output, std::uint64_t seed, int threads) {
  const SemilinearProblem p = build_problem(pf);
  StudyConfig cfg;
  cfg.problem_id = p.id;
  cfg.t = pf.t < 0 ? p.horizon : pf.t;
  cfg.x = parse_point(pf.x, p.dimension);
  cfg.levels = parse_levels(levels_spec);
  cfg.seeds = seeds;
  cfg.reference = reference;
  cfg.output_path = output;
  cfg.root_seed = seed;
  cfg.threads = threads;

  const StudyResult result = run_study(p, cfg);

  std::ofstream rows_out(output);
  if (!rows_out) throw std::runtime_error("study: cannot open output '" + output + "'");
  write_study_rows_csv(p, result, rows_out);

  std::string spath = summary_output;
  if (spath.empty()) {
    spath = output;
    const auto dot = spath.rfind('.');
    if (dot == std::string::npos) spath += ".summary.csv";
    else spath.insert(dot, ".summary");
  }
  std::ofstream sum_out(spath);
  if (!sum_out) throw std::runtime_error("study: cannot open summary output '" + spath + "'");
  write_study_summary_csv(p, result, sum_out);

  std::cout << "# wrote " << output << " and " << spath << "\n";
  for (const auto& s : result.summary) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", s.rmse);
    std::cout << "n=" << s.level.n << " M=" << s.level.M << " rmse=" << buf
              << " mean_cost=" << static_cast<std::uint64_t>(s.mean_cost_total) << "\n";
  }
  return 0;
}

int cmd_rate(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("rate: cannot open '" + input + "'");
  const auto pts = read_summary_points(in);
  const RateFit fit = fit_rate(pts);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", fit.slope);
  std::cout << "slope=" << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.10g", fit.intercept);
  std::cout << "intercept=" << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.10g", fit.r_squared);
  std::cout << "r2=" << buf << "\n";
  return 0;
}

int cmd_verify_cost(const std::string& levels_spec, int d) {
  const std::vector<MlpLevel> levels = parse_levels(levels_spec);
  const CostVerifyReport report = verify_cost_model(levels, d);
  for (const auto& row : report.rows) {
    std::cout << "n=" << row.level.n << " M=" << row.level.M << " d=" << d << " measured=("
              << row.measured.f_evals << "," << row.measured.g_evals << ","
              << row.measured.scalar_draws << ") predicted=(" << row.predicted.f_evals << ","
              << row.predicted.g_evals << "," << row.predicted.scalar_draws << ") "
              << (row.pass ? "PASS" : "FAIL") << "\n";
  }
  std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 1;
}

int cmd_oracle(const ProblemFlags& pf, const std::string& name, std::uint64_t samples,
               double lambda, double tau, int time_steps, int picard_n, double g0,
               std::uint64_t seed, int threads) {
  char buf[40];
  if (name == "feynman-kac") {
    const SemilinearProblem p = build_problem(pf);
    const double t = pf.t < 0 ? p.horizon : pf.t;
    const std::vector<double> x = parse_point(pf.x, p.dimension);
    CostLedger led;
    FeynmanKacOptions opt;
    opt.time_steps = time_steps;
    opt.threads = threads;
    const McEstimate e = feynman_kac(p, t, x, samples, StreamKey::root(seed), led, opt);
    echo_config(std::cout, pf, p, seed, threads);
    std::snprintf(buf, sizeof buf, "%.17g", e.mean);
    std::cout << "mean=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", e.std_error);
    std::cout << "std_error=" << buf << "\nsamples=" << e.samples << "\n";
    std::cout << "scalar_draws=" << led.scalar_draws << "\n";
    return 0;
  }
  if (name == "cole-hopf") {
    const SemilinearProblem p = build_problem(pf);
    const std::vector<double> x = parse_point(pf.x, p.dimension);
    CostLedger led;
    const auto& g = p.initial_value;
    const McEstimate e = cole_hopf_hjb([&g](std::span<const double> y) { return g(y); }, lambda,
                                       tau, x, samples, StreamKey::root(seed), led, threads);
    echo_config(std::cout, pf, p, seed, threads);
    std::snprintf(buf, sizeof buf, "%.17g", e.mean);
    std::cout << "mean=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", e.std_error);
    std::cout << "std_error=" << buf << "\nsamples=" << e.samples << "\n";
    return 0;
  }
  if (name == "hopf") {
    const SemilinearProblem p = build_problem(pf);
    const double t = pf.t < 0 ? p.horizon : pf.t;
    const std::vector<double> x = parse_point(pf.x, p.dimension);
    const auto& g = p.initial_value;
    // Built-in conjugate H*(q) = |q|^2 / 2 (quadratic Hamiltonian).
    auto h_star = [](std::span<const double> q) {
      double s = 0.0;
      for (double v : q) s += v * v;
      return 0.5 * s;
    };
    const HopfResult r =
        hopf_hj([&g](std::span<const double> y) { return g(y); }, h_star, t, x);
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    std::cout << "value=" << buf << "\nconverged=" << (r.converged ? 1 : 0) << "\n";
    return 0;
  }
  if (name == "ode-picard") {
    const Nonlinearity f = Nonlinearity::from_name(pf.f);
    const double t = pf.t < 0 ? pf.T : pf.t;
    const double v = ode_picard_oracle([&f](double u) { return f(u); }, g0, t, picard_n);
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::cout << "value=" << buf << "\n";
    return 0;
  }
  if (name == "quadrature") {
    const SemilinearProblem p = build_problem(pf);
    const double t = pf.t < 0 ? p.horizon : pf.t;
    const std::vector<double> x = parse_point(pf.x, p.dimension);
    const QuadratureSolution sol = quadrature_fixed_point_1d(p);
    std::snprintf(buf, sizeof buf, "%.17g", sol.value_at(t, x.at(0)));
    std::cout << "value=" << buf << "\nconverged=" << (sol.converged ? 1 : 0)
              << "\niterations=" << sol.iterations << "\n";
    std::snprintf(buf, sizeof buf, "%.3g", sol.residual);
    std::cout << "residual=" << buf << "\n";
    return 0;
  }
  throw std::invalid_argument("oracle: unknown name '" + name + "'");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLP Monte Carlo solver and benchmark harness for semilinear parabolic PDEs"};
  app.require_subcommand(1);

  ProblemFlags pf;
  std::uint64_t seed = 0;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  std::string config_path;

  int n = 1;
  std::uint64_t M = 1;
  bool hoist_f0 = false;
  std::string levels_spec = "1,2,3,4,5";
  int seeds = 20;
  std::string reference = "const:0";
  std::string output = "study.csv";
  std::string summary_output;
  std::string rate_input;
  int verify_d = 1;
  std::string oracle_name = "feynman-kac";
  std::uint64_t samples = 100000;
  double lambda = 1.0, tau = 0.5;
  int time_steps = 1, picard_n = 3;
  double g0 = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    add_problem_flags(cmd, pf);
    cmd->add_option("--seed", seed, "Root seed (64-bit)")
        ->envname("MLPPDE_SEED")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--config", config_path, "Flat key=value config file")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };

  CLI::App* solve = app.add_subcommand("solve", "One MLP estimate at a point");
  add_common(solve);
  solve->add_option("--n", n, "Picard depth")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  solve->add_option("--M", M, "Monte Carlo base")
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  solve->add_flag("--hoist-f0", hoist_f0,
                  "Evaluate f(0) once per run (ledger then deviates from predict_cost)");

  CLI::App* study = app.add_subcommand("study", "Convergence study over levels and seeds");
  add_common(study);
  study->add_option("--levels", levels_spec, "Levels: k (diagonal) or nxM, comma separated")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  study->add_option("--seeds", seeds, "Independent seeds per level (>= 2)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  study->add_option("--reference", reference,
                    "const:<v> | quadrature | ode-exact | feynman-kac:<N> | self:n=M=<k>")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  study->add_option("--output", output, "Rows CSV path")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  study->add_option("--summary-output", summary_output, "Summary CSV path (default: derived)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CLI::App* rate = app.add_subcommand("rate", "Fit error-vs-cost exponent from a summary CSV");
  rate->add_option("--input", rate_input, "Summary CSV")->required();

  CLI::App* verify = app.add_subcommand("verify-cost", "Measured ledger vs analytic cost model");
  verify->add_option("--levels", levels_spec, "Levels: k or nxM, comma separated")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  verify->add_option("--d", verify_d, "Dimension")
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CLI::App* oracle = app.add_subcommand("oracle", "Evaluate a reference oracle");
  add_common(oracle);
  oracle->add_option("--name", oracle_name,
                     "feynman-kac | cole-hopf | hopf | ode-picard | quadrature")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--samples", samples, "Monte Carlo samples")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--lambda", lambda, "Cole-Hopf lambda")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--tau", tau, "Cole-Hopf time-to-go")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--time-steps", time_steps, "Feynman-Kac source sub-intervals")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--picard-n", picard_n, "ODE Picard depth")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  oracle->add_option("--g0", g0, "ODE initial value")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    // Pre-scan for --config so file values can be injected before parsing.
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string cpath;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cpath = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) cpath = args[i].substr(9);
    }
    if (!cpath.empty() && !args.empty()) {
      CLI::App* sub = app.get_subcommand_no_throw(args[0]);
      if (!sub) throw std::runtime_error("config: give the subcommand before --config");
      const std::vector<std::string> injected = load_config_file(cpath, sub);
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    }
    // CLI11 wants reversed argument order for parse(vector).
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);

    if (app.got_subcommand(solve)) return cmd_solve(pf, n, M, seed, threads, hoist_f0);
    if (app.got_subcommand(study))
      return cmd_study(pf, levels_spec, seeds, reference, output, summary_output, seed, threads);
    if (app.got_subcommand(rate)) return cmd_rate(rate_input);
    if (app.got_subcommand(verify)) return cmd_verify_cost(levels_spec, verify_d);
    if (app.got_subcommand(oracle))
      return cmd_oracle(pf, oracle_name, samples, lambda, tau, time_steps, picard_n, g0, seed,
                        threads);
    throw std::runtime_error("no subcommand");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
