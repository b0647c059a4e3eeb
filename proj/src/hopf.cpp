// Hopf-formula evaluator: multistart coordinate-wise line search on
// F(y) = g(y) + t * H*((x - y)/t).

#include "mlppde/oracles.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mlppde {

namespace {

using Fn = std::function<double(std::span<const double>)>;
using Grad = std::function<void(std::span<const double>, std::span<double>)>;

struct Objective {
  const Fn& g;
  const Fn& h_star;
  const Grad& grad_g;
  const Grad& grad_h;
  double t;
  std::span<const double> x;
  mutable std::vector<double> q, gg, gh;

  double operator()(std::span<const double> y) const {
    q.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) q[i] = (x[i] - y[i]) / t;
    return g(y) + t * h_star(q);
  }

  // grad F = grad g(y) - grad H*((x-y)/t); central differences where no
  // analytic gradient was supplied.
  void gradient(std::span<const double> y, std::span<double> out) const {
    const std::size_t d = y.size();
    gg.resize(d);
    gh.resize(d);
    std::vector<double> yt(y.begin(), y.end());
    if (grad_g) {
      grad_g(y, gg);
    } else {
      for (std::size_t i = 0; i < d; ++i) {
        const double h = 1e-6 * (1.0 + std::fabs(y[i]));
        yt[i] = y[i] + h;
        const double fp = g(yt);
        yt[i] = y[i] - h;
        const double fm = g(yt);
        yt[i] = y[i];
        gg[i] = (fp - fm) / (2.0 * h);
      }
    }
    q.resize(d);
    for (std::size_t i = 0; i < d; ++i) q[i] = (x[i] - y[i]) / t;
    if (grad_h) {
      grad_h(q, gh);
    } else {
      std::vector<double> qt(q);
      for (std::size_t i = 0; i < d; ++i) {
        const double h = 1e-6 * (1.0 + std::fabs(q[i]));
        qt[i] = q[i] + h;
        const double fp = h_star(qt);
        qt[i] = q[i] - h;
        const double fm = h_star(qt);
        qt[i] = q[i];
        gh[i] = (fp - fm) / (2.0 * h);
      }
    }
    for (std::size_t i = 0; i < d; ++i) out[i] = gg[i] - gh[i];
  }
};

// Golden-section minimize of phi on [a, b].
template <class Phi>
double golden_min(Phi&& phi, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = phi(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// Value-comparison searches cannot place a minimizer better than about
// sqrt(eps); a couple of derivative-based Newton steps push the coordinate
// to gradient-noise level, which the 1e-8 stopping rule needs.
template <class Phi>
void newton_polish(Phi&& phi, double& v) {
  for (int it = 0; it < 3; ++it) {
    const double h = 1e-5 * (1.0 + std::fabs(v));
    const double fp = phi(v + h), fm = phi(v - h), f0 = phi(v);
    const double d1 = (fp - fm) / (2.0 * h);
    const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
    if (!(d2 > 0.0) || !std::isfinite(d1)) return;
    const double move = d1 / d2;
    if (!std::isfinite(move) || std::fabs(move) > 1e3 * h) return;
    if (phi(v - move) <= f0) v -= move;
    else return;
  }
}

// One-dimensional descent along coordinate i: expand a bracket around the
// current point, golden-section inside it.
void line_search_coord(const Objective& obj, std::vector<double>& y, std::size_t i) {
  auto phi = [&](double v) {
    const double saved = y[i];
    y[i] = v;
    const double f = obj(y);
    y[i] = saved;
    return f;
  };
  const double y0 = y[i];
  const double f0 = phi(y0);
  double step = 0.5 * (1.0 + std::fabs(y0));
  double dir = 0.0, fbest = f0;
  for (int side = 0; side < 2 && dir == 0.0; ++side) {
    const double sgn = side == 0 ? 1.0 : -1.0;
    if (phi(y0 + sgn * step * 1e-3) < f0) dir = sgn;
  }
  if (dir == 0.0) {
    // Not descending at coarse scale; polish locally around y0.
    const double h = 1e-4 * (1.0 + std::fabs(y0));
    y[i] = golden_min(phi, y0 - h, y0 + h, 1e-13 * (1.0 + std::fabs(y0)));
    if (phi(y[i]) > f0) y[i] = y0;
    newton_polish(phi, y[i]);
    return;
  }
  // Expand until the function increases again; [y0, cur] then brackets the
  // descent path.
  double cur = y0 + dir * step;
  double fcur = phi(cur);
  int guard = 0;
  while (fcur < fbest && guard++ < 60) {
    fbest = fcur;
    step *= 2.0;
    cur += dir * step;
    fcur = phi(cur);
  }
  const double a = std::min(y0, cur), b = std::max(y0, cur);
  y[i] = golden_min(phi, a, b, 1e-13 * (1.0 + std::fabs(y0) + (b - a)));
  newton_polish(phi, y[i]);
}

} // namespace

HopfResult hopf_hj(const Fn& g, const Fn& h_star, double t, std::span<const double> x,
                   const HopfOptions& options, const Grad& grad_g, const Grad& grad_h_star) {
  if (!(t > 0.0)) throw std::invalid_argument("hopf_hj: t must be > 0");
  const std::size_t d = x.size();
  Objective obj{g, h_star, grad_g, grad_h_star, t, x, {}, {}, {}};

  const StreamKey cloud = StreamKey::root(options.seed);
  CostLedger scratch;

  HopfResult best;
  best.value = std::numeric_limits<double>::infinity();
  bool any_converged = false;

  std::vector<double> y(d), grad(d);
  for (int s = 0; s < std::max(1, options.starts); ++s) {
    if (s == 0) {
      y.assign(x.begin(), x.end());
    } else {
      gaussian_fill(cloud, static_cast<std::uint64_t>(s), y, scratch);
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + options.cloud_radius * y[i];
    }

    double gnorm = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      for (std::size_t i = 0; i < d; ++i) line_search_coord(obj, y, i);
      obj.gradient(y, grad);
      gnorm = 0.0;
      for (double v : grad) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      if (gnorm < options.grad_tol) {
        converged = true;
        break;
      }
    }
    const double fv = obj(y);
    if (fv < best.value) {
      best.value = fv;
      best.minimizer.assign(y.begin(), y.end());
      best.grad_norm = gnorm;
      best.converged = converged;
    }
    any_converged = any_converged || converged;
  }

  if (!any_converged) {
    std::ostringstream os;
    os << "hopf_hj: no start reached gradient tolerance " << options.grad_tol
       << "; best value found " << best.value << " (gradient norm " << best.grad_norm << ")";
    throw std::runtime_error(os.str());
  }
  return best;
}

} // namespace mlppde
