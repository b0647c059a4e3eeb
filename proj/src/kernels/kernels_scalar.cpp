// Scalar reference backend. This is the ground truth the AVX2 backend is
// equivalence-tested against, and the fallback on machines without AVX2.

#include "mlppde/kernels.hpp"

#include <limits>

#include "lane_scalar.hpp"

namespace mlppde::kern {

namespace {

namespace sc {
using namespace lane_scalar;
#include "math_cores.inl"
} // namespace sc

void fill_uniform_impl(std::uint64_t hi, std::uint64_t lo, std::uint64_t slot0,
                       std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t y0, y1;
    sc::threefry_block(hi, lo, slot0 + i, kSaltUniform, y0, y1);
    out[i] = sc::u01_from_bits(y0);
  }
}

void fill_gaussian_impl(std::uint64_t hi, std::uint64_t lo, std::uint64_t salt,
                        std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t y0, y1;
    sc::threefry_block(hi, lo, i, salt, y0, y1);
    out[i] = sc::invnorm_core(sc::u01_from_bits(y0));
  }
}

void heat_step_impl(const double* x, const double* z, double scale, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + scale * z[i];
}

void gbm_step_impl(const double* x, const double* z, double drift, double volscale,
                   double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] * sc::exp_core(drift + volscale * z[i]);
}

double sum_impl(const double* x, std::size_t n) {
  double a[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a[0] += x[i];
    a[1] += x[i + 1];
    a[2] += x[i + 2];
    a[3] += x[i + 3];
  }
  for (; i < n; ++i) a[i & 3] += x[i];
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double norm_sq_impl(const double* x, std::size_t n) {
  double a[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a[0] += x[i] * x[i];
    a[1] += x[i + 1] * x[i + 1];
    a[2] += x[i + 2] * x[i + 2];
    a[3] += x[i + 3] * x[i + 3];
  }
  for (; i < n; ++i) a[i & 3] += x[i] * x[i];
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double min_coord_impl(const double* x, std::size_t n) {
  double a[4];
  a[0] = a[1] = a[2] = a[3] = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a[0] = sc::v_min(a[0], x[i]);
    a[1] = sc::v_min(a[1], x[i + 1]);
    a[2] = sc::v_min(a[2], x[i + 2]);
    a[3] = sc::v_min(a[3], x[i + 3]);
  }
  for (; i < n; ++i) a[i & 3] = sc::v_min(a[i & 3], x[i]);
  return sc::v_min(sc::v_min(a[0], a[1]), sc::v_min(a[2], a[3]));
}

void map_exp_impl(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sc::exp_core(x[i]);
}
void map_log_impl(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sc::log_core(x[i]);
}
void map_invnorm_impl(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sc::invnorm_core(u[i]);
}

} // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      "scalar",       fill_uniform_impl, fill_gaussian_impl, heat_step_impl,
      gbm_step_impl,  sum_impl,          norm_sq_impl,       min_coord_impl,
      map_exp_impl,   map_log_impl,      map_invnorm_impl,
  };
  return table;
}

double u01_from_word(std::uint64_t word) { return sc::u01_from_bits(word); }
double exp1(double x) { return sc::exp_core(x); }
double log1(double x) { return sc::log_core(x); }
double invnorm1(double u) { return sc::invnorm_core(u); }

void threefry1(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0, std::uint64_t c1,
               std::uint64_t& y0, std::uint64_t& y1) {
  sc::threefry_block(k0, k1, c0, c1, y0, y1);
}

} // namespace mlppde::kern
