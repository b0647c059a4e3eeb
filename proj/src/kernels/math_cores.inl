// Element math shared by the scalar and AVX2 backends. This file is
// included into a namespace where a lane type set (vf/vu/vm + ops) is
// visible; the op sequence below is what defines the backend-independent
// bit pattern of every generated value, so the order of operations here
// is load-bearing. Keep mul/add separate (no fma), keep Horner order.

// ---------------------------------------------------------------------------
// Threefry2x64, 20 rounds. Key schedule parity constant from Skein; rotation
// constants for the 2x64 variant: 16,42,12,31,16,32,24,21 repeating.
// ---------------------------------------------------------------------------

template <int R> inline void tf_round(vu& x0, vu& x1) {
  x0 = u_add(x0, x1);
  x1 = rotl<R>(x1);
  x1 = u_xor(x1, x0);
}

inline void threefry_block(std::uint64_t k0, std::uint64_t k1, vu c0, vu c1,
                           vu& y0, vu& y1) {
  const std::uint64_t k2 = 0x1BD11BDAA9FC1A22ull ^ k0 ^ k1;

  vu x0 = u_add(c0, usplat(k0));
  vu x1 = u_add(c1, usplat(k1));

  tf_round<16>(x0, x1); tf_round<42>(x0, x1); tf_round<12>(x0, x1); tf_round<31>(x0, x1);
  x0 = u_add(x0, usplat(k1)); x1 = u_add(x1, usplat(k2 + 1));

  tf_round<16>(x0, x1); tf_round<32>(x0, x1); tf_round<24>(x0, x1); tf_round<21>(x0, x1);
  x0 = u_add(x0, usplat(k2)); x1 = u_add(x1, usplat(k0 + 2));

  tf_round<16>(x0, x1); tf_round<42>(x0, x1); tf_round<12>(x0, x1); tf_round<31>(x0, x1);
  x0 = u_add(x0, usplat(k0)); x1 = u_add(x1, usplat(k1 + 3));

  tf_round<16>(x0, x1); tf_round<32>(x0, x1); tf_round<24>(x0, x1); tf_round<21>(x0, x1);
  x0 = u_add(x0, usplat(k1)); x1 = u_add(x1, usplat(k2 + 4));

  tf_round<16>(x0, x1); tf_round<42>(x0, x1); tf_round<12>(x0, x1); tf_round<31>(x0, x1);
  x0 = u_add(x0, usplat(k2)); x1 = u_add(x1, usplat(k0 + 5));

  y0 = x0;
  y1 = x1;
}

// Top 52 bits -> (0,1), centered: u = (y >> 12) * 2^-52 + 2^-53.
// Never exactly 0 or 1, so it is a valid inverse-CDF argument.
inline vf u01_from_bits(vu y) {
  vf f = u52_to_f(u_shr<12>(y));
  return f * splat(0x1p-52) + splat(0x1p-53);
}

template <std::size_t N>
inline vf horner(vf x, const double (&coef)[N]) {
  vf p = splat(coef[0]);
  for (std::size_t i = 1; i < N; ++i) p = p * x + splat(coef[i]);
  return p;
}

// ---------------------------------------------------------------------------
// log for positive normal doubles. Mantissa reduced to [sqrt(1/2), sqrt(2)),
// atanh series in s = (m-1)/(m+1).
// ---------------------------------------------------------------------------

inline vf log_core(vf x) {
  static constexpr double kLn2Hi = 6.93147180369123816490e-01;
  static constexpr double kLn2Lo = 1.90821492927058770002e-10;
  static constexpr double kSqrt2 = 1.41421356237309514547;
  static constexpr double kSeries[11] = {
      2.0 / 21.0, 2.0 / 19.0, 2.0 / 17.0, 2.0 / 15.0, 2.0 / 13.0, 2.0 / 11.0,
      2.0 / 9.0,  2.0 / 7.0,  2.0 / 5.0,  2.0 / 3.0,  2.0};

  vu bits = f_to_bits(x);
  vf e = u52_to_f(u_shr<52>(bits)) - splat(1023.0);
  vu mant = u_or(u_and(bits, usplat(0x000FFFFFFFFFFFFFull)),
                 usplat(0x3FF0000000000000ull));
  vf m = bits_to_f(mant); // [1, 2)

  vm upper = cmp_ge(m, splat(kSqrt2));
  m = v_select(upper, m * splat(0.5), m);
  e = v_select(upper, e + splat(1.0), e);

  vf s = (m - splat(1.0)) / (m + splat(1.0));
  vf t = s * s;
  vf r = s * horner(t, kSeries);
  return e * splat(kLn2Hi) + (e * splat(kLn2Lo) + r);
}

// ---------------------------------------------------------------------------
// exp, clamped to [-708, 708]: 2^k * P(r) with r = x - k*ln2, |r| <= ln2/2.
// ---------------------------------------------------------------------------

inline vf exp_core(vf x) {
  static constexpr double kLog2e = 1.44269504088896338700;
  static constexpr double kLn2Hi = 6.93147180369123816490e-01;
  static constexpr double kLn2Lo = 1.90821492927058770002e-10;
  static constexpr double kTaylor[14] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0,
      1.0,                1.0};

  x = v_min(v_max(x, splat(-708.0)), splat(708.0));
  vf k = v_round(x * splat(kLog2e));
  vf r = (x - k * splat(kLn2Hi)) - k * splat(kLn2Lo);
  vf p = horner(r, kTaylor);
  vu kb = f_to_u_small(k + splat(1023.0));
  vf scale = bits_to_f(u_shl<52>(kb));
  return p * scale;
}

// ---------------------------------------------------------------------------
// Inverse standard normal CDF. Central region (|u - 1/2| <= 0.425) uses
// Wichura's AS 241 rational; the two tail regions use rational
// approximations in r = sqrt(-log(min(u, 1-u))) fitted against extended-
// precision erfc (max relative error ~1e-14 mid, ~3e-13 far; the far region
// covers every positive double down to the subnormals).
// ---------------------------------------------------------------------------

inline vf invnorm_core(vf u) {
  static constexpr double kA[8] = {
      2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4,
      4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3,
      1.3314166789178437745e+2, 3.3871328727963666080e+0};
  static constexpr double kB[8] = {
      5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4,
      2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2,
      4.2313330701600911252e+1, 1.0};
  // mid tail: r in [1.595, 5.01]
  static constexpr double kMidScale = 0.585651537335285505117;
  static constexpr double kMidShift = -1.93411420204978038069;
  static constexpr double kMidNum[8] = {
      0.00119673336220268040571, 0.0289422813308543199336, 0.276039369551725198522,
      1.37719530971672024912,    3.93381716489554896475,   6.48488757666902387042,
      5.73965775296707804171,    2.10927148279661488372};
  static constexpr double kMidDen[8] = {
      1.56927416131956822402e-09, 0.000495518134222029651928, 0.0110301075173582179586,
      0.0934513185372244731616,   0.397046358246341935297,    0.907537609543090489786,
      1.06939463885110968807,     0.51103210136005119339};
  // far tail: r in [4.99, 27.6]
  static constexpr double kFarScale = 0.0884564352056612118481;
  static constexpr double kFarShift = -1.44139761167624944711;
  static constexpr double kFarNum[8] = {
      0.0266040730979084696929, 0.506647804687812691401, 3.78840173987153822337,
      14.7523568811216312631,   32.7842382328186054755,  41.9913749615183154035,
      28.9059928822987784007,   8.29310832518705190464};
  static constexpr double kFarDen[8] = {
      2.56893693932477333096e-10, 0.00166402664087844213375, 0.0292916434619233546809,
      0.194783566955599845089,    0.642600804549522884612,   1.12757501557439936027,
      1.00902088451295395357,     0.362648646279175864755};

  vf q = u - splat(0.5);
  vf aq = v_abs(q);

  // central: |q| <= 0.425
  vf rc = splat(0.180625) - q * q;
  vf zc = q * (horner(rc, kA) / horner(rc, kB));

  // tails; log_core needs a positive normal argument, so saturate at the
  // smallest normal (only reachable for u outside the generator's range)
  vf pm = v_max(v_min(u, splat(1.0) - u), splat(2.2250738585072014e-308));
  vf r = v_sqrt(splat(0.0) - log_core(pm));
  vf xm = r * splat(kMidScale) + splat(kMidShift);
  vf xf = r * splat(kFarScale) + splat(kFarShift);
  vf zn = horner(xm, kMidNum) / horner(xm, kMidDen);
  vf zf = horner(xf, kFarNum) / horner(xf, kFarDen);
  vf zt = v_select(cmp_le(r, splat(5.0)), zn, zf);
  zt = v_select(cmp_lt(q, splat(0.0)), v_neg(zt), zt);

  return v_select(cmp_le(aq, splat(0.425)), zc, zt);
}
