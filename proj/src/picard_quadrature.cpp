// Deterministic oracles: the ODE Picard iterate for x-independent problems
// and the 1-d Gauss-Hermite fixed-point solver for the mild formulation.

#include "mlppde/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlppde {

namespace {

// Cumulative integral of w on a uniform grid, 4th order: Simpson pairs for
// even indices, local quadratic for the odd half-panel.
void cumulative_integral(const std::vector<double>& w, double h, std::vector<double>& out) {
  const std::size_t n = w.size();
  out.resize(n);
  out[0] = 0.0;
  if (n == 2) {
    out[1] = 0.5 * h * (w[0] + w[1]);
    return;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 2 < n) {
      out[i + 1] = out[i] + h / 12.0 * (5.0 * w[i] + 8.0 * w[i + 1] - w[i + 2]);
    } else {
      out[i + 1] = out[i] + h / 12.0 * (-w[i - 1] + 8.0 * w[i] + 5.0 * w[i + 1]);
    }
    ++i;
    if (i + 1 < n) out[i + 1] = out[i - 1] + h / 3.0 * (w[i - 1] + 4.0 * w[i] + w[i + 1]);
  }
}

double picard_on_grid(const std::function<double(double)>& f, double g0, double t, int n,
                      std::size_t grid_points) {
  const std::size_t N = grid_points; // even
  const double h = t / static_cast<double>(N);
  std::vector<double> v(N + 1, 0.0), w(N + 1), integral;
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= N; ++i) w[i] = f(v[i]);
    cumulative_integral(w, h, integral);
    for (std::size_t i = 0; i <= N; ++i) v[i] = g0 + integral[i];
  }
  return v[N];
}

} // namespace

double ode_picard_oracle(const std::function<double(double)>& f, double g0, double t, int n) {
  if (n < 0) throw std::invalid_argument("ode_picard_oracle: n must be >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("ode_picard_oracle: t must be >= 0");
  if (n == 0) return 0.0;
  if (t == 0.0) return g0;

  double prev = picard_on_grid(f, g0, t, n, 64);
  for (std::size_t N = 128; N <= 65536; N *= 2) {
    const double cur = picard_on_grid(f, g0, t, n, N);
    if (std::fabs(cur - prev) <= 1e-12 * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pim4 = 0.7511255444649425; // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0, z_prev1 = 0.0, z_prev2 = 0.0;
  for (int i = 0; i < m; ++i) {
    // Stieltjes-style initial guesses, largest root first.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * z_prev2;
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * z_prev2;
    } else {
      z = 2.0 * z - z_prev2;
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15 * (1.0 + std::fabs(z))) break;
    }
    if (i >= 1) z_prev2 = z_prev1;
    z_prev1 = z;
    nodes[i] = -z; // fill ascending: most negative first
    nodes[n - 1 - i] = z;
    const double w = 2.0 / (pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

namespace {

// Cubic Lagrange interpolation on a uniform grid; clamps to the edge value
// outside the grid (the solution is flat far out for decaying g).
double interp_row(const std::vector<double>& row, double x0, double inv_h, double x) {
  const double p = (x - x0) * inv_h;
  const double nmax = static_cast<double>(row.size() - 1);
  if (p <= 0.0) return row.front();
  if (p >= nmax) return row.back();
  std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(p);
  if (i0 < 1) i0 = 1;
  if (i0 > static_cast<std::ptrdiff_t>(row.size()) - 3) i0 = row.size() - 3;
  const double f = p - static_cast<double>(i0);
  const double wm1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double w0 = (f * f - 1.0) * (f - 2.0) / 2.0;
  const double w1 = -f * (f + 1.0) * (f - 2.0) / 2.0;
  const double w2 = f * (f * f - 1.0) / 6.0;
  return wm1 * row[i0 - 1] + w0 * row[i0] + w1 * row[i0 + 1] + w2 * row[i0 + 2];
}

} // namespace

double QuadratureSolution::value_at(double t, double x) const {
  if (times.empty()) throw std::runtime_error("QuadratureSolution: empty");
  const double x0 = xs.front();
  const double inv_h = (xs.size() > 1) ? 1.0 / (xs[1] - xs[0]) : 0.0;
  if (t <= times.front()) return interp_row(u.front(), x0, inv_h, x);
  if (t >= times.back()) return interp_row(u.back(), x0, inv_h, x);
  std::size_t j = 1;
  while (times[j] < t) ++j;
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return (1.0 - w) * interp_row(u[j - 1], x0, inv_h, x) +
         w * interp_row(u[j], x0, inv_h, x);
}

QuadratureSolution quadrature_fixed_point_1d(const SemilinearProblem& problem,
                                             const QuadratureGrid& grid, int picard_iters) {
  problem.validate();
  if (problem.dimension != 1)
    throw std::invalid_argument("quadrature_fixed_point_1d: requires d = 1");
  if (!is_heat(problem.diffusion))
    throw std::invalid_argument("quadrature_fixed_point_1d: requires the scaled heat diffusion");
  if (grid.time_steps < 1 || grid.space_points < 8 || grid.gh_nodes < 2)
    throw std::invalid_argument("quadrature_fixed_point_1d: degenerate grid");

  const int Nt = grid.time_steps;
  const int Ni = grid.space_points;
  const double T = problem.horizon;
  const double ht = T / Nt;
  const double hx = 2.0 * grid.space_radius / (Ni - 1);

  QuadratureSolution sol;
  sol.times.resize(Nt + 1);
  for (int j = 0; j <= Nt; ++j) sol.times[j] = j * ht;
  sol.xs.resize(Ni);
  for (int i = 0; i < Ni; ++i) sol.xs[i] = -grid.space_radius + i * hx;

  std::vector<double> gh_x, gh_w;
  gauss_hermite(grid.gh_nodes, gh_x, gh_w);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);

  // E[h(x + sqrt(2) W_tau)] with h given on the grid: offsets 2 sqrt(tau) xi.
  auto apply_gh_row = [&](double tau, const std::vector<double>& row, std::vector<double>& out) {
    if (tau == 0.0) {
      out = row;
      return;
    }
    // Row-constant shortcut (x-independent problems).
    bool flat = true;
    for (double v : row)
      if (v != row.front()) {
        flat = false;
        break;
      }
    if (flat) {
      out.assign(row.size(), row.front());
      return;
    }
    const double spread = 2.0 * std::sqrt(tau);
    const double x0 = sol.xs.front();
    const double inv_h = 1.0 / hx;
    out.resize(row.size());
    for (int i = 0; i < Ni; ++i) {
      double acc = 0.0;
      for (int q = 0; q < grid.gh_nodes; ++q)
        acc += gh_w[q] * interp_row(row, x0, inv_h, sol.xs[i] + spread * gh_x[q]);
      out[i] = acc * inv_sqrt_pi;
    }
  };

  // g smoothed by the heat kernel, evaluated exactly at the quadrature
  // points (no interpolation); fixed across iterations.
  std::vector<std::vector<double>> gpart(Nt + 1, std::vector<double>(Ni));
  for (int j = 0; j <= Nt; ++j) {
    const double spread = 2.0 * std::sqrt(sol.times[j]);
    for (int i = 0; i < Ni; ++i) {
      if (j == 0) {
        const double xi = sol.xs[i];
        gpart[j][i] = problem.initial_value(std::span<const double>(&xi, 1));
      } else {
        double acc = 0.0;
        for (int q = 0; q < grid.gh_nodes; ++q) {
          const double xq = sol.xs[i] + spread * gh_x[q];
          acc += gh_w[q] * problem.initial_value(std::span<const double>(&xq, 1));
        }
        gpart[j][i] = acc * inv_sqrt_pi;
      }
    }
  }

  sol.u.assign(Nt + 1, std::vector<double>(Ni, 0.0));
  std::vector<std::vector<double>> next(Nt + 1, std::vector<double>(Ni, 0.0));
  std::vector<std::vector<double>> frow(Nt + 1, std::vector<double>(Ni));
  std::vector<double> fterm(Ni), acc(Ni);

  const auto& f = problem.nonlinearity;
  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < picard_iters; ++iter) {
    for (int l = 0; l <= Nt; ++l)
      for (int i = 0; i < Ni; ++i) frow[l][i] = f(sol.u[l][i]);

    for (int j = 0; j <= Nt; ++j) {
      next[j] = gpart[j];
      if (j == 0) continue;
      // trapezoid over s = 0..t_j of E[f(u(s, x + sqrt(2) W_{t_j - s}))]
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int l = 0; l <= j; ++l) {
        apply_gh_row(sol.times[j] - sol.times[l], frow[l], fterm);
        const double wq = (l == 0 || l == j) ? 0.5 : 1.0;
        for (int i = 0; i < Ni; ++i) acc[i] += wq * fterm[i];
      }
      for (int i = 0; i < Ni; ++i) next[j][i] += ht * acc[i];
    }

    residual = 0.0;
    for (int j = 0; j <= Nt; ++j)
      for (int i = 0; i < Ni; ++i)
        residual = std::max(residual, std::fabs(next[j][i] - sol.u[j][i]));
    sol.u.swap(next);
    if (residual < grid.tol) {
      ++iter;
      break;
    }
  }
  sol.iterations = iter;
  sol.residual = residual;
  sol.converged = residual < grid.tol;
  return sol;
}

} // namespace mlppde
