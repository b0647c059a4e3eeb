#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlppde/ledger.hpp"
#include "mlppde/problem.hpp"
#include "mlppde/streams.hpp"

// Independent reference solvers the acceptance tests compare the MLP
// estimator against: linear Feynman-Kac Monte Carlo, the Cole-Hopf
// log-expectation for the LQG HJB equation, the Hopf formula for first-order
// HJ equations, a deterministic ODE Picard oracle, and a 1-d Gauss-Hermite
// fixed-point solver.

namespace mlppde {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

struct FeynmanKacOptions {
  // Midpoint sub-intervals for the time integral of the source term; only
  // used when `source` is set.
  int time_steps = 1;
  // Explicit source term f(s, x). Without it the problem's nonlinearity must
  // be the zero function.
  std::function<double(double, std::span<const double>)> source;
  int threads = 1;
};

/// u(t,x) = E[g(X_{0,t,x}) + integral of the source along the path], for
/// linear problems only; rejects u-dependent nonlinearities.
McEstimate feynman_kac(const SemilinearProblem& problem, double t,
                       std::span<const double> x, std::uint64_t samples,
                       const StreamKey& key, CostLedger& ledger,
                       const FeynmanKacOptions& options = {});

/// u = -(1/lambda) log E[exp(-lambda g(x + sqrt(2) W_tau))], std error by the
/// delta method. g should be bounded below: the transformed payoff
/// exp(-lambda g) blows up otherwise, and overflow is rejected with a
/// rescale hint.
McEstimate cole_hopf_hjb(const std::function<double(std::span<const double>)>& g,
                         double lambda, double tau, std::span<const double> x,
                         std::uint64_t samples, const StreamKey& key, CostLedger& ledger,
                         int threads = 1);

struct HopfOptions {
  int starts = 16;          // multistart count; first start is y = x
  double cloud_radius = 1.0;
  int max_sweeps = 1000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0x5EED0FF1CE5EEDull; // start-cloud stream
};

struct HopfResult {
  double value = 0.0;
  std::vector<double> minimizer;
  double grad_norm = 0.0;
  bool converged = false;
};

/// inf_y ( g(y) + t * h_star((x - y)/t) ) by multistart coordinate-wise line
/// search. `grad_*` are optional; central differences are used when absent.
/// Throws (with the best value found in the message) if no start converges.
HopfResult hopf_hj(const std::function<double(std::span<const double>)>& g,
                   const std::function<double(std::span<const double>)>& h_star,
                   double t, std::span<const double> x, const HopfOptions& options = {},
                   const std::function<void(std::span<const double>, std::span<double>)>& grad_g = nullptr,
                   const std::function<void(std::span<const double>, std::span<double>)>& grad_h_star = nullptr);

/// n-th Picard iterate of u' = f(u), u(0) = g0: v_0 = 0,
/// v_k(t) = g0 + integral of f(v_{k-1}). Cumulative-Simpson grids refined
/// until the result is stable to 1e-12.
double ode_picard_oracle(const std::function<double(double)>& f, double g0, double t, int n);

struct QuadratureGrid {
  int time_steps = 48;
  int space_points = 801;
  double space_radius = 16.0;
  int gh_nodes = 64;
  double tol = 1e-9;
};

struct QuadratureSolution {
  std::vector<double> times;
  std::vector<double> xs;
  std::vector<std::vector<double>> u; // u[j][i] at (times[j], xs[i])
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;

  double value_at(double t, double x) const;
};

/// Deterministic fixed-point solve of the mild formulation in d = 1 for the
/// scaled heat diffusion: Gauss-Hermite in space, trapezoid in time, Picard
/// iteration to sup-norm tolerance.
QuadratureSolution quadrature_fixed_point_1d(const SemilinearProblem& problem,
                                             const QuadratureGrid& grid = {},
                                             int picard_iters = 64);

/// Nodes/weights for integrating exp(-x^2) * phi(x) over R.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace mlppde
