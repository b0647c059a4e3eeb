// AVX2 backend: 4-wide main loops, scalar-core tail. Compiled with -mavx2
// on x86 only; selected at runtime when the CPU supports it. Must produce
// bit-identical output to the scalar backend (enforced by test_kernels).

#include "mlppde/kernels.hpp"

#if MLPPDE_HAVE_AVX2

#include <limits>

#include "lane_avx2.hpp"
#include "lane_scalar.hpp"

namespace mlppde::kern {

namespace {

namespace av {
using namespace lane_avx2;
#include "math_cores.inl"
} // namespace av

namespace sc {
using namespace lane_scalar;
#include "math_cores.inl"
} // namespace sc

void fill_uniform_impl(std::uint64_t hi, std::uint64_t lo, std::uint64_t slot0,
                       std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    av::vu y0, y1;
    av::threefry_block(hi, lo, av::u_lane_iota(slot0 + i), av::usplat(kSaltUniform), y0, y1);
    av::storev(out + i, av::u01_from_bits(y0));
  }
  for (; i < n; ++i) {
    std::uint64_t y0, y1;
    sc::threefry_block(hi, lo, slot0 + i, kSaltUniform, y0, y1);
    out[i] = sc::u01_from_bits(y0);
  }
}

void fill_gaussian_impl(std::uint64_t hi, std::uint64_t lo, std::uint64_t salt,
                        std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    av::vu y0, y1;
    av::threefry_block(hi, lo, av::u_lane_iota(i), av::usplat(salt), y0, y1);
    av::storev(out + i, av::invnorm_core(av::u01_from_bits(y0)));
  }
  for (; i < n; ++i) {
    std::uint64_t y0, y1;
    sc::threefry_block(hi, lo, i, salt, y0, y1);
    out[i] = sc::invnorm_core(sc::u01_from_bits(y0));
  }
}

void heat_step_impl(const double* x, const double* z, double scale, double* out,
                    std::size_t n) {
  const av::vf s = av::splat(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    av::storev(out + i, av::loadv(x + i) + s * av::loadv(z + i));
  for (; i < n; ++i) out[i] = x[i] + scale * z[i];
}

void gbm_step_impl(const double* x, const double* z, double drift, double volscale,
                   double* out, std::size_t n) {
  const av::vf dr = av::splat(drift);
  const av::vf vs = av::splat(volscale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    av::storev(out + i, av::loadv(x + i) * av::exp_core(dr + vs * av::loadv(z + i)));
  for (; i < n; ++i) out[i] = x[i] * sc::exp_core(drift + volscale * z[i]);
}

double sum_impl(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  for (; i < n; ++i) a[i & 3] += x[i];
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double norm_sq_impl(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  for (; i < n; ++i) a[i & 3] += x[i] * x[i];
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double min_coord_impl(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  for (; i < n; ++i) a[i & 3] = sc::v_min(a[i & 3], x[i]);
  return sc::v_min(sc::v_min(a[0], a[1]), sc::v_min(a[2], a[3]));
}

void map_exp_impl(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) av::storev(out + i, av::exp_core(av::loadv(x + i)));
  for (; i < n; ++i) out[i] = sc::exp_core(x[i]);
}
void map_log_impl(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) av::storev(out + i, av::log_core(av::loadv(x + i)));
  for (; i < n; ++i) out[i] = sc::log_core(x[i]);
}
void map_invnorm_impl(const double* u, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) av::storev(out + i, av::invnorm_core(av::loadv(u + i)));
  for (; i < n; ++i) out[i] = sc::invnorm_core(u[i]);
}

} // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      "avx2",         fill_uniform_impl, fill_gaussian_impl, heat_step_impl,
      gbm_step_impl,  sum_impl,          norm_sq_impl,       min_coord_impl,
      map_exp_impl,   map_log_impl,      map_invnorm_impl,
  };
  return table;
}

} // namespace mlppde::kern

#endif // MLPPDE_HAVE_AVX2
