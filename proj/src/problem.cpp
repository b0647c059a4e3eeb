#include "mlppde/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mlppde/kernels.hpp"

namespace mlppde {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_num(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
  }
}

} // namespace

bool is_heat(const DiffusionModel& m) { return std::holds_alternative<ScaledHeat>(m); }

std::string diffusion_name(const DiffusionModel& m) {
  if (is_heat(m)) return "heat";
  const auto& g = std::get<GeometricBm>(m);
  std::ostringstream os;
  os << "gbm(mu=" << g.mu << ",sigma=" << g.sigma << ")";
  return os.str();
}

void sample_transition(const DiffusionModel& model, double s, double t,
                       std::span<const double> x, std::span<const double> draw,
                       std::span<double> out) {
  if (!(s >= 0.0) || !(t >= s)) throw std::invalid_argument("sample_transition: need 0 <= s <= t");
  if (x.size() != draw.size() || x.size() != out.size())
    throw std::invalid_argument("sample_transition: size mismatch");
  require_finite(x, "sample_transition");

  if (is_heat(model)) {
    const double scale = std::sqrt(2.0 * (t - s));
    kern::active().heat_step(x.data(), draw.data(), scale, out.data(), x.size());
  } else {
    const auto& g = std::get<GeometricBm>(model);
    const double dt = t - s;
    const double drift = (g.mu - 0.5 * g.sigma * g.sigma) * dt;
    const double volscale = g.sigma * std::sqrt(dt);
    kern::active().gbm_step(x.data(), draw.data(), drift, volscale, out.data(), x.size());
  }
}

// --- Nonlinearity -----------------------------------------------------------

double Nonlinearity::operator()(double u) const {
  if (clamp && working_interval)
    u = std::clamp(u, working_interval->first, working_interval->second);
  return fn(u);
}

Nonlinearity Nonlinearity::zero() {
  return {"zero", [](double) { return 0.0; }, 0.0, std::nullopt, false};
}

Nonlinearity Nonlinearity::linear(double a) {
  return {"linear:" + std::to_string(a), [a](double u) { return a * u; }, std::fabs(a),
          std::nullopt, false};
}

Nonlinearity Nonlinearity::allen_cahn(bool clamped, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("allen_cahn: need lo < hi");
  // |f'(u)| = |1 - 3u^2| is maximal at an interval endpoint.
  const double L = std::max(std::fabs(1.0 - 3.0 * lo * lo), std::fabs(1.0 - 3.0 * hi * hi));
  Nonlinearity f;
  f.name = clamped ? "allen-cahn-clamped" : "allen-cahn";
  f.fn = [](double u) { return u - u * u * u; };
  f.lipschitz = L;
  f.working_interval = std::make_pair(lo, hi);
  f.clamp = clamped;
  return f;
}

Nonlinearity Nonlinearity::default_risk(double delta, double rate, double gamma_h,
                                        double gamma_l, double v_h, double v_l) {
  if (!(v_h < v_l)) throw std::invalid_argument("default_risk: need v_h < v_l");
  if (!(gamma_h >= gamma_l) || !(gamma_l >= 0.0))
    throw std::invalid_argument("default_risk: need gamma_h >= gamma_l >= 0");
  const double slope = (gamma_l - gamma_h) / (v_l - v_h);
  auto Q = [=](double u) {
    if (u < v_h) return gamma_h;
    if (u > v_l) return gamma_l;
    return gamma_h + slope * (u - v_h);
  };
  auto fn = [=](double u) { return -(1.0 - delta) * Q(u) * u - rate * u; };
  // f is piecewise linear-times-affine; the derivative bound is attained at a
  // segment endpoint, so the global constant is the max over those.
  const double onemd = 1.0 - delta;
  double L = std::max(onemd * gamma_h + rate, onemd * gamma_l + rate);
  L = std::max(L, std::fabs(onemd * (slope * v_h + gamma_h) + rate));
  L = std::max(L, std::fabs(onemd * (slope * v_l + gamma_l) + rate));
  std::ostringstream os;
  os << "default-risk:" << delta << ":" << rate << ":" << gamma_h << ":" << gamma_l
     << ":" << v_h << ":" << v_l;
  return {os.str(), fn, L, std::nullopt, false};
}

Nonlinearity Nonlinearity::from_name(const std::string& spec) {
  auto parts = split(spec, ':');
  const std::string& head = parts.empty() ? spec : parts[0];
  if (head == "zero") return zero();
  if (head == "linear") {
    if (parts.size() != 2) throw std::invalid_argument("f: linear needs 'linear:<a>'");
    return linear(parse_num(parts[1], "f"));
  }
  if (head == "allen-cahn") return allen_cahn(false);
  if (head == "allen-cahn-clamped") return allen_cahn(true);
  if (head == "default-risk") {
    if (parts.size() != 7)
      throw std::invalid_argument(
          "f: default-risk needs 'default-risk:<delta>:<R>:<gamma_h>:<gamma_l>:<v_h>:<v_l>'");
    return default_risk(parse_num(parts[1], "f"), parse_num(parts[2], "f"),
                        parse_num(parts[3], "f"), parse_num(parts[4], "f"),
                        parse_num(parts[5], "f"), parse_num(parts[6], "f"));
  }
  throw std::invalid_argument("f: unknown nonlinearity '" + spec + "'");
}

// --- GFunction ---------------------------------------------------------------

double GFunction::operator()(std::span<const double> x) const {
  const auto& k = kern::active();
  switch (kind) {
    case Kind::Constant: return constant;
    case Kind::Sum: return k.sum(x.data(), x.size());
    case Kind::NormSq: return k.norm_sq(x.data(), x.size());
    case Kind::LogHalfOnePlusNormSq:
      return kern::log1(0.5 * (1.0 + k.norm_sq(x.data(), x.size())));
    case Kind::MinCoord: return k.min_coord(x.data(), x.size());
    case Kind::Custom: return fn(x);
  }
  throw std::logic_error("GFunction: bad kind");
}

GFunction GFunction::constant_g(double c) {
  GFunction g;
  g.kind = Kind::Constant;
  g.constant = c;
  g.name = "constant:" + std::to_string(c);
  return g;
}

GFunction GFunction::custom(std::string name, std::function<double(std::span<const double>)> fn) {
  GFunction g;
  g.kind = Kind::Custom;
  g.name = std::move(name);
  g.fn = std::move(fn);
  return g;
}

GFunction GFunction::from_name(const std::string& spec) {
  GFunction g;
  g.name = spec;
  if (spec.rfind("constant:", 0) == 0) {
    g.kind = Kind::Constant;
    g.constant = parse_num(spec.substr(9), "g");
    return g;
  }
  if (spec == "sum") { g.kind = Kind::Sum; return g; }
  if (spec == "norm_sq") { g.kind = Kind::NormSq; return g; }
  if (spec == "log_half_one_plus_normsq") { g.kind = Kind::LogHalfOnePlusNormSq; return g; }
  if (spec == "min_coord") { g.kind = Kind::MinCoord; return g; }
  throw std::invalid_argument("g: unknown initial-value function '" + spec + "'");
}

// --- SemilinearProblem --------------------------------------------------------

void SemilinearProblem::validate() const {
  if (dimension < 1) throw std::invalid_argument("problem: dimension must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("problem: horizon must be > 0");
  if (!(nonlinearity.lipschitz >= 0.0))
    throw std::invalid_argument("problem: Lipschitz constant must be >= 0");
  if (const auto* g = std::get_if<GeometricBm>(&diffusion))
    if (!(g->sigma > 0.0)) throw std::invalid_argument("problem: gbm sigma must be > 0");
}

double evaluate_f(const SemilinearProblem& p, double u, CostLedger& ledger) {
  if (!std::isfinite(u)) throw std::invalid_argument("evaluate_f: non-finite argument");
  ledger.f_evals += 1;
  return p.nonlinearity(u);
}

double evaluate_g(const SemilinearProblem& p, std::span<const double> x, CostLedger& ledger) {
  require_finite(x, "evaluate_g");
  ledger.g_evals += 1;
  return p.initial_value(x);
}

} // namespace mlppde
