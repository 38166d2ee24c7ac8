#pragma once

// Lane-width abstraction plus exp/tanh evaluated the same way in every
// variant: the scalar type mirrors the SIMD instruction sequence op for op
// (fma included), so a given lane produces identical bits in the scalar and
// vector kernels. Inputs are assumed finite.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace rcpinn::kern {

struct ScalarVec {
  static constexpr int width = 1;
  double v;

  static ScalarVec splat(double x) { return {x}; }
  static ScalarVec zero() { return {0.0}; }
  static ScalarVec load(const double* p) { return {*p}; }
  void store(double* p) const { *p = v; }
  double lane(int) const { return v; }
  double hsum() const { return v; }

  friend ScalarVec operator+(ScalarVec a, ScalarVec b) { return {a.v + b.v}; }
  friend ScalarVec operator-(ScalarVec a, ScalarVec b) { return {a.v - b.v}; }
  friend ScalarVec operator*(ScalarVec a, ScalarVec b) { return {a.v * b.v}; }
  friend ScalarVec operator/(ScalarVec a, ScalarVec b) { return {a.v / b.v}; }

  static ScalarVec fma(ScalarVec a, ScalarVec b, ScalarVec c) { return {std::fma(a.v, b.v, c.v)}; }
  // -(a*b) + c, single rounding
  static ScalarVec fnma(ScalarVec a, ScalarVec b, ScalarVec c) {
    return {std::fma(-a.v, b.v, c.v)};
  }
  static ScalarVec min(ScalarVec a, ScalarVec b) { return {a.v < b.v ? a.v : b.v}; }
  static ScalarVec max(ScalarVec a, ScalarVec b) { return {a.v > b.v ? a.v : b.v}; }
  static ScalarVec abs(ScalarVec a) { return {std::fabs(a.v)}; }

  using Mask = bool;
  static Mask cmp_lt(ScalarVec a, ScalarVec b) { return a.v < b.v; }
  static ScalarVec select(Mask m, ScalarVec yes, ScalarVec no) { return m ? yes : no; }

  // round to nearest even, kept as double (mirrors cvtpd semantics)
  static ScalarVec nearest_int(ScalarVec a) { return {std::nearbyint(a.v)}; }
  // 2^n for integral-valued n, |n| < 1023, via exponent-bit construction
  static ScalarVec pow2i(ScalarVec n) {
    const std::int64_t k = static_cast<std::int64_t>(n.v);
    return {std::bit_cast<double>((k + 1023) << 52)};
  }
};

#if defined(__AVX2__) && defined(__FMA__)

struct AvxVec {
  static constexpr int width = 4;
  __m256d v;

  static AvxVec splat(double x) { return {_mm256_set1_pd(x)}; }
  static AvxVec zero() { return {_mm256_setzero_pd()}; }
  static AvxVec load(const double* p) { return {_mm256_loadu_pd(p)}; }
  void store(double* p) const { _mm256_storeu_pd(p, v); }
  double lane(int i) const {
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, v);
    return tmp[i];
  }
  // fixed-order reduction: ((l0 + l1) + l2) + l3
  double hsum() const {
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, v);
    return ((tmp[0] + tmp[1]) + tmp[2]) + tmp[3];
  }

  friend AvxVec operator+(AvxVec a, AvxVec b) { return {_mm256_add_pd(a.v, b.v)}; }
  friend AvxVec operator-(AvxVec a, AvxVec b) { return {_mm256_sub_pd(a.v, b.v)}; }
  friend AvxVec operator*(AvxVec a, AvxVec b) { return {_mm256_mul_pd(a.v, b.v)}; }
  friend AvxVec operator/(AvxVec a, AvxVec b) { return {_mm256_div_pd(a.v, b.v)}; }

  static AvxVec fma(AvxVec a, AvxVec b, AvxVec c) { return {_mm256_fmadd_pd(a.v, b.v, c.v)}; }
  static AvxVec fnma(AvxVec a, AvxVec b, AvxVec c) { return {_mm256_fnmadd_pd(a.v, b.v, c.v)}; }
  static AvxVec min(AvxVec a, AvxVec b) { return {_mm256_min_pd(a.v, b.v)}; }
  static AvxVec max(AvxVec a, AvxVec b) { return {_mm256_max_pd(a.v, b.v)}; }
  static AvxVec abs(AvxVec a) {
    return {_mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v)};
  }

  using Mask = __m256d;
  static Mask cmp_lt(AvxVec a, AvxVec b) { return _mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ); }
  static AvxVec select(Mask m, AvxVec yes, AvxVec no) {
    return {_mm256_blendv_pd(no.v, yes.v, m)};
  }

  static AvxVec nearest_int(AvxVec a) {
    return {_mm256_round_pd(a.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)};
  }
  static AvxVec pow2i(AvxVec n) {
    const __m128i k32 = _mm256_cvtpd_epi32(n.v);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    return {_mm256_castsi256_pd(bits)};
  }
};

#endif  // __AVX2__ && __FMA__

namespace detail {

// exp via base-2 range reduction and a degree-2/3 rational minimax kernel
// (the classic Cephes layout); ~1-2 ulp over the clamped range [-708, 708].
inline constexpr double kExpP[3] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                                    9.99999999999999999910e-1};
inline constexpr double kExpQ[4] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                                    2.27265548208155028766e-1, 2.00000000000000000005e0};
inline constexpr double kLog2E = 1.4426950408889634073599;
inline constexpr double kLn2Hi = 6.93145751953125e-1;
inline constexpr double kLn2Lo = 1.42860682030941723212e-6;

// tanh small-|x| rational kernel coefficients (|x| < 0.625)
inline constexpr double kTanhP[3] = {-9.64399179425052238628e-1, -9.92877231001918586564e1,
                                     -1.61468768441708447952e3};
inline constexpr double kTanhQ[3] = {1.12811678491632931402e2, 2.23548839060100448583e3,
                                     4.84406305325125486048e3};

}  // namespace detail

template <class V>
inline V vexp(V x) {
  using namespace detail;
  x = V::min(V::max(x, V::splat(-708.0)), V::splat(708.0));
  const V n = V::nearest_int(x * V::splat(kLog2E));
  x = V::fnma(n, V::splat(kLn2Hi), x);
  x = V::fnma(n, V::splat(kLn2Lo), x);
  const V xx = x * x;
  V p = V::splat(kExpP[0]);
  p = V::fma(p, xx, V::splat(kExpP[1]));
  p = V::fma(p, xx, V::splat(kExpP[2]));
  const V px = x * p;
  V q = V::splat(kExpQ[0]);
  q = V::fma(q, xx, V::splat(kExpQ[1]));
  q = V::fma(q, xx, V::splat(kExpQ[2]));
  q = V::fma(q, xx, V::splat(kExpQ[3]));
  V e = px / (q - px);
  e = V::fma(V::splat(2.0), e, V::splat(1.0));
  return e * V::pow2i(n);
}

template <class V>
inline V vtanh(V x) {
  using namespace detail;
  const V ax = V::abs(x);
  // |x| >= 0.625: 1 - 2/(exp(2|x|)+1), sign restored; saturates naturally
  const V ex = vexp(ax + ax);
  V zl = V::splat(1.0) - V::splat(2.0) / (ex + V::splat(1.0));
  zl = V::select(V::cmp_lt(x, V::zero()), V::zero() - zl, zl);
  // |x| < 0.625: x + x^3 * P(x^2)/Q(x^2) with monic Q
  const V z2 = x * x;
  V p = V::splat(kTanhP[0]);
  p = V::fma(p, z2, V::splat(kTanhP[1]));
  p = V::fma(p, z2, V::splat(kTanhP[2]));
  V q = z2 + V::splat(kTanhQ[0]);
  q = V::fma(q, z2, V::splat(kTanhQ[1]));
  q = V::fma(q, z2, V::splat(kTanhQ[2]));
  const V zs = V::fma(x * z2, p / q, x);
  return V::select(V::cmp_lt(ax, V::splat(0.625)), zs, zl);
}

}  // namespace rcpinn::kern
