#pragma once

#include <cstdint>
#include <immintrin.h>

// AVX2 lane: 4 doubles / 4 uint64 per vector. Same op set as lane_scalar;
// every operation here is the 4-wide version of the exact scalar IEEE op
// (no FMA, no approximate instructions), so per-element results match the
// scalar lane bit for bit.

namespace mlppde::kern::lane_avx2 {

struct vf {
  __m256d v;
};
struct vu {
  __m256i v;
};
struct vm {
  __m256d v; // all-ones / all-zeros per lane
};

inline constexpr int kWidth = 4;

inline vf splat(double x) { return {_mm256_set1_pd(x)}; }
inline vu usplat(std::uint64_t x) { return {_mm256_set1_epi64x(static_cast<long long>(x))}; }
inline vu u_lane_iota(std::uint64_t base) {
  return {_mm256_setr_epi64x(static_cast<long long>(base), static_cast<long long>(base + 1),
                             static_cast<long long>(base + 2), static_cast<long long>(base + 3))};
}

inline vf loadv(const double* p) { return {_mm256_loadu_pd(p)}; }
inline void storev(double* p, vf x) { _mm256_storeu_pd(p, x.v); }

inline vu u_add(vu a, vu b) { return {_mm256_add_epi64(a.v, b.v)}; }
inline vu u_xor(vu a, vu b) { return {_mm256_xor_si256(a.v, b.v)}; }
inline vu u_or(vu a, vu b) { return {_mm256_or_si256(a.v, b.v)}; }
inline vu u_and(vu a, vu b) { return {_mm256_and_si256(a.v, b.v)}; }

template <int K> inline vu u_shl(vu a) { return {_mm256_slli_epi64(a.v, K)}; }
template <int K> inline vu u_shr(vu a) { return {_mm256_srli_epi64(a.v, K)}; }
template <int R> inline vu rotl(vu a) {
  return {_mm256_or_si256(_mm256_slli_epi64(a.v, R), _mm256_srli_epi64(a.v, 64 - R))};
}

inline vf bits_to_f(vu a) { return {_mm256_castsi256_pd(a.v)}; }
inline vu f_to_bits(vf a) { return {_mm256_castpd_si256(a.v)}; }

// Exact for integral values below 2^52: set the exponent of 2^52 above the
// 52 value bits, reinterpret, subtract 2^52.
inline vf u52_to_f(vu a) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
  __m256d d = _mm256_castsi256_pd(_mm256_or_si256(a.v, magic));
  return {_mm256_sub_pd(d, _mm256_set1_pd(4503599627370496.0))};
}
// Exact for non-negative integral doubles below 2^31.
inline vu f_to_u_small(vf a) {
  __m128i i32 = _mm256_cvtpd_epi32(a.v); // values are integral; conversion exact
  return {_mm256_cvtepi32_epi64(i32)};
}

inline vf v_neg(vf a) {
  return {_mm256_xor_pd(a.v, _mm256_set1_pd(-0.0))};
}
inline vf v_abs(vf a) {
  return {_mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v)};
}
inline vf v_sqrt(vf a) { return {_mm256_sqrt_pd(a.v)}; }
inline vf v_min(vf a, vf b) { return {_mm256_min_pd(a.v, b.v)}; }
inline vf v_max(vf a, vf b) { return {_mm256_max_pd(a.v, b.v)}; }
inline vf v_round(vf a) {
  return {_mm256_round_pd(a.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)};
}

inline vm cmp_le(vf a, vf b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)}; }
inline vm cmp_lt(vf a, vf b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
inline vm cmp_ge(vf a, vf b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GE_OQ)}; }
inline vf v_select(vm m, vf a, vf b) { return {_mm256_blendv_pd(b.v, a.v, m.v)}; }

inline vf operator+(vf a, vf b) { return {_mm256_add_pd(a.v, b.v)}; }
inline vf operator-(vf a, vf b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline vf operator*(vf a, vf b) { return {_mm256_mul_pd(a.v, b.v)}; }
inline vf operator/(vf a, vf b) { return {_mm256_div_pd(a.v, b.v)}; }

} // namespace mlppde::kern::lane_avx2
