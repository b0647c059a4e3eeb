#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "mlppde/ledger.hpp"

namespace mlppde {

// ---------------------------------------------------------------------------
// Diffusion models with exact transition sampling (no time stepping).
// ---------------------------------------------------------------------------

/// X_{s,t,x} = x + sqrt(2) (W_t - W_s); per-coordinate variance 2(t-s).
struct ScaledHeat {};

/// Componentwise geometric Brownian motion,
/// X_t = x * exp((mu - sigma^2/2)(t-s) + sigma (W_t - W_s)).
/// Extension beyond the heat-kernel setting; flagged as such in run metadata.
struct GeometricBm {
  double mu = 0.0;
  double sigma = 0.2;
};

using DiffusionModel = std::variant<ScaledHeat, GeometricBm>;

bool is_heat(const DiffusionModel& m);
std::string diffusion_name(const DiffusionModel& m);

/// Exact-law transition sample. `draw` must hold d standard normals supplied
/// by the stream module (the caller's ledger already counted them).
/// Writes into `out`; s == t returns x bit-exactly.
void sample_transition(const DiffusionModel& model, double s, double t,
                       std::span<const double> x, std::span<const double> draw,
                       std::span<double> out);

// ---------------------------------------------------------------------------
// Nonlinearity f: R -> R with a declared Lipschitz constant. Non-globally
// Lipschitz built-ins (Allen-Cahn) declare a working interval; an optional
// clamp restricts the argument to that interval and is off by default.
// ---------------------------------------------------------------------------

struct Nonlinearity {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 0.0;
  // Interval on which `lipschitz` is valid; empty means all of R.
  std::optional<std::pair<double, double>> working_interval;
  bool clamp = false;

  double operator()(double u) const;

  static Nonlinearity zero();
  static Nonlinearity linear(double a);
  static Nonlinearity allen_cahn(bool clamped = false, double lo = -2.0, double hi = 2.0);
  static Nonlinearity default_risk(double delta, double rate, double gamma_h,
                                   double gamma_l, double v_h, double v_l);

  /// Parses "zero", "linear:<a>", "allen-cahn", "allen-cahn-clamped",
  /// "default-risk:<delta>:<R>:<gh>:<gl>:<vh>:<vl>".
  static Nonlinearity from_name(const std::string& spec);
};

// ---------------------------------------------------------------------------
// Initial-value function g: R^d -> R. Built-ins are evaluated through the
// kernel backend; Custom accepts any callable.
// ---------------------------------------------------------------------------

struct GFunction {
  enum class Kind { Constant, Sum, NormSq, LogHalfOnePlusNormSq, MinCoord, Custom };

  Kind kind = Kind::Constant;
  double constant = 0.0;
  std::string name;
  std::function<double(std::span<const double>)> fn; // Custom only

  double operator()(std::span<const double> x) const;

  static GFunction constant_g(double c);
  static GFunction custom(std::string name, std::function<double(std::span<const double>)> fn);

  /// Parses "constant:<c>", "sum", "norm_sq", "log_half_one_plus_normsq",
  /// "min_coord".
  static GFunction from_name(const std::string& spec);
};

// ---------------------------------------------------------------------------
// The PDE instance.
// ---------------------------------------------------------------------------

struct SemilinearProblem {
  int dimension = 1;
  double horizon = 1.0;
  DiffusionModel diffusion = ScaledHeat{};
  Nonlinearity nonlinearity = Nonlinearity::zero();
  GFunction initial_value = GFunction::constant_g(0.0);
  std::string id;

  /// Validates invariants (d >= 1, T > 0, L >= 0); throws on violation.
  void validate() const;
};

/// f(u) with the ledger's f_evals incremented by exactly 1.
double evaluate_f(const SemilinearProblem& p, double u, CostLedger& ledger);

/// g(x) with the ledger's g_evals incremented by exactly 1.
double evaluate_g(const SemilinearProblem& p, std::span<const double> x, CostLedger& ledger);

} // namespace mlppde
