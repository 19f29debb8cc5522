// AVX2+FMA kernel backend.  This translation unit is compiled with
// -mavx2 -mfma and only linked when MCDC_HAVE_AVX2 is defined; callers reach
// it through avx2_backend() in dispatch.cpp after a CPU check.
//
// Blocks of four observations go through the vector path; the remainder is
// handled by plain libm loops, so tail values may differ from lane values by
// a couple of ulp.  The equivalence tests pin the agreement with the scalar
// backend.

#include "mcdc/kernels.hpp"

#if defined(MCDC_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace mcdc::kernels {
namespace avx2 {

namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;  // 2^-33 trailing bits zero
constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline double hsum(__m256d v) {
  const __m128d lo = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

/// exp(x) on four lanes.  Reduction x = k*ln2 + r, |r| <= ln2/2; exp(r) by a
/// degree-13 Taylor polynomial; scaling by 2^k through the exponent field.
/// Inputs are clamped to [-708, 709]; lanes below -745 (including -inf)
/// return exactly zero.
inline __m256d exp4(__m256d x) {
  const __m256d keep = _mm256_cmp_pd(x, _mm256_set1_pd(-745.0), _CMP_GE_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));

  const __m128i ki =
      _mm256_cvtpd_epi32(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)));
  const __m256d k = _mm256_cvtepi32_pd(ki);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // k is within [-1021, 1023] after the clamp, so the biased exponent stays
  // in range and 2^k is a normal double.
  const __m256i pow2 = _mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(ki), _mm256_set1_epi64x(1023)), 52);
  p = _mm256_mul_pd(p, _mm256_castsi256_pd(pow2));
  return _mm256_and_pd(p, keep);
}

/// log(x) on four lanes for positive normal inputs.  Splits x = m * 2^e with
/// m in [sqrt(1/2), sqrt(2)), evaluates log(m) through the atanh series in
/// s = (m-1)/(m+1), and recombines e*ln2 in high/low pieces.
inline __m256d log4(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                      _mm256_set1_epi64x(0x3ff0000000000000LL)));  // [1, 2)

  // Biased exponents are small integers; squeeze the four 64-bit lanes into
  // 32-bit lanes to reach the int32->double conversion.
  const __m256i expbits = _mm256_srli_epi64(bits, 52);
  const __m128i e32 = _mm_castps_si128(_mm_shuffle_ps(
      _mm_castsi128_ps(_mm256_castsi256_si128(expbits)),
      _mm_castsi128_ps(_mm256_extracti128_si256(expbits, 1)), _MM_SHUFFLE(2, 0, 2, 0)));
  __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(e32), _mm256_set1_pd(1023.0));

  const __m256d fold =
      _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730950488), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), fold);
  e = _mm256_add_pd(e, _mm256_and_pd(fold, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 19.0);
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
  p = _mm256_fmadd_pd(p, s2, one);
  const __m256d logm = _mm256_mul_pd(_mm256_add_pd(s, s), p);

  return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi),
                         _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), logm));
}

void log_density2(const Term2& t, const double* xs, const double* ys, double* out,
                  std::size_t n) {
  const __m256d mu0 = _mm256_set1_pd(t.mu0), mu1 = _mm256_set1_pd(t.mu1);
  const __m256d a = _mm256_set1_pd(t.a), b = _mm256_set1_pd(t.b),
                c = _mm256_set1_pd(t.c);
  const __m256d bias = _mm256_set1_pd(t.bias), mhalf = _mm256_set1_pd(-0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), mu0);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), mu1);
    const __m256d u = _mm256_mul_pd(a, dx);
    const __m256d v = _mm256_fmadd_pd(b, dx, _mm256_mul_pd(c, dy));
    const __m256d q = _mm256_fmadd_pd(u, u, _mm256_mul_pd(v, v));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(mhalf, q, bias));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - t.mu0, dy = ys[i] - t.mu1;
    const double u = t.a * dx, v = t.b * dx + t.c * dy;
    out[i] = t.bias - 0.5 * (u * u + v * v);
  }
}

double posterior_normalize(double* const* terms, std::size_t nterms, std::size_t n) {
  const __m256d neg_inf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d acc = _mm256_setzero_pd();
  bool ok = true;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d hi = neg_inf;
    for (std::size_t t = 0; t < nterms; ++t)
      hi = _mm256_max_pd(hi, _mm256_loadu_pd(terms[t] + i));
    if (_mm256_movemask_pd(_mm256_cmp_pd(hi, neg_inf, _CMP_EQ_OQ))) ok = false;
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t t = 0; t < nterms; ++t) {
      const __m256d e = exp4(_mm256_sub_pd(_mm256_loadu_pd(terms[t] + i), hi));
      _mm256_storeu_pd(terms[t] + i, e);
      sum = _mm256_add_pd(sum, e);
    }
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), sum);
    for (std::size_t t = 0; t < nterms; ++t)
      _mm256_storeu_pd(terms[t] + i,
                       _mm256_mul_pd(_mm256_loadu_pd(terms[t] + i), inv));
    acc = _mm256_add_pd(acc, _mm256_add_pd(hi, log4(sum)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < nterms; ++t) hi = std::max(hi, terms[t][i]);
    if (!std::isfinite(hi)) {
      ok = false;
      continue;
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < nterms; ++t) {
      const double e = std::exp(terms[t][i] - hi);
      terms[t][i] = e;
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::size_t t = 0; t < nterms; ++t) terms[t][i] *= inv;
    total += hi + std::log(sum);
  }
  if (!ok) return std::numeric_limits<double>::quiet_NaN();
  return total;
}

WeightedSums weighted_sums2(const double* xs, const double* ys, const double* w,
                            std::size_t n) {
  __m256d sw = _mm256_setzero_pd(), sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    sw = _mm256_add_pd(sw, wv);
    sx = _mm256_fmadd_pd(wv, _mm256_loadu_pd(xs + i), sx);
    sy = _mm256_fmadd_pd(wv, _mm256_loadu_pd(ys + i), sy);
  }
  WeightedSums s{hsum(sw), hsum(sx), hsum(sy)};
  for (; i < n; ++i) {
    s.w += w[i];
    s.x += w[i] * xs[i];
    s.y += w[i] * ys[i];
  }
  return s;
}

WeightedScatter weighted_scatter2(const double* xs, const double* ys, const double* w,
                                  double mu0, double mu1, std::size_t n) {
  const __m256d m0 = _mm256_set1_pd(mu0), m1 = _mm256_set1_pd(mu1);
  __m256d sxx = _mm256_setzero_pd(), sxy = _mm256_setzero_pd(),
          syy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d cx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), m0);
    const __m256d cy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), m1);
    const __m256d wcx = _mm256_mul_pd(wv, cx);
    sxx = _mm256_fmadd_pd(wcx, cx, sxx);
    sxy = _mm256_fmadd_pd(wcx, cy, sxy);
    syy = _mm256_fmadd_pd(_mm256_mul_pd(wv, cy), cy, syy);
  }
  WeightedScatter s{hsum(sxx), hsum(sxy), hsum(syy)};
  for (; i < n; ++i) {
    const double cx = xs[i] - mu0, cy = ys[i] - mu1;
    s.xx += w[i] * cx * cx;
    s.xy += w[i] * cx * cy;
    s.yy += w[i] * cy * cy;
  }
  return s;
}

void vexp(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = std::exp(in[i]);
}

void vlog(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, log4(_mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = std::log(in[i]);
}

}  // namespace
}  // namespace avx2

namespace detail {

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Backend& avx2_backend_impl() {
  static const Backend backend = {
      "avx2",
      &avx2::log_density2,
      &avx2::posterior_normalize,
      &avx2::weighted_sums2,
      &avx2::weighted_scatter2,
      &avx2::vexp,
      &avx2::vlog,
  };
  return backend;
}

}  // namespace detail
}  // namespace mcdc::kernels

#endif  // MCDC_HAVE_AVX2
