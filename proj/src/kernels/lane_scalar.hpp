#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>

// Scalar lane: one double / one uint64 per "vector". The math cores are
// written against this tiny op set and compile unchanged against the AVX2
// lane, which is what makes the two backends bit-identical per element.

namespace mlppde::kern::lane_scalar {

using vf = double;
using vu = std::uint64_t;
using vm = bool;

inline constexpr int kWidth = 1;

inline vf splat(double x) { return x; }
inline vu usplat(std::uint64_t x) { return x; }
inline vu u_lane_iota(std::uint64_t base) { return base; }

inline vf loadv(const double* p) { return *p; }
inline void storev(double* p, vf x) { *p = x; }

inline vu u_add(vu a, vu b) { return a + b; }
inline vu u_xor(vu a, vu b) { return a ^ b; }
inline vu u_or(vu a, vu b) { return a | b; }
inline vu u_and(vu a, vu b) { return a & b; }

template <int K> inline vu u_shl(vu a) { return a << K; }
template <int K> inline vu u_shr(vu a) { return a >> K; }
template <int R> inline vu rotl(vu a) { return (a << R) | (a >> (64 - R)); }

inline vf bits_to_f(vu a) {
  double d;
  std::memcpy(&d, &a, 8);
  return d;
}
inline vu f_to_bits(vf a) {
  std::uint64_t u;
  std::memcpy(&u, &a, 8);
  return u;
}

// Exact for integral values below 2^52.
inline vf u52_to_f(vu a) { return static_cast<double>(a); }
// Exact for non-negative integral doubles below 2^31.
inline vu f_to_u_small(vf a) { return static_cast<std::uint64_t>(a); }

inline vf v_neg(vf a) { return bits_to_f(f_to_bits(a) ^ 0x8000000000000000ull); }
inline vf v_abs(vf a) { return bits_to_f(f_to_bits(a) & 0x7FFFFFFFFFFFFFFFull); }
inline vf v_sqrt(vf a) { return std::sqrt(a); }
// Mirror MINPD/MAXPD: return the second operand when the comparison fails.
inline vf v_min(vf a, vf b) { return a < b ? a : b; }
inline vf v_max(vf a, vf b) { return a > b ? a : b; }
inline vf v_round(vf a) { return std::nearbyint(a); }

inline vm cmp_le(vf a, vf b) { return a <= b; }
inline vm cmp_lt(vf a, vf b) { return a < b; }
inline vm cmp_ge(vf a, vf b) { return a >= b; }
inline vf v_select(vm m, vf a, vf b) { return m ? a : b; }

} // namespace mlppde::kern::lane_scalar
