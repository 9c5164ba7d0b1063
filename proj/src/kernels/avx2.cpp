#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "slc/kernels.hpp"

// Functions carry target attributes instead of building the file with -mavx2,
// so no inline helper from a shared header is ever emitted with AVX2 code.
#define SLC_AVX2 __attribute__((target("avx2")))

namespace slc::kernels::detail {
namespace {

SLC_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

SLC_AVX2 double abs_second_diff_sum(const float* prev, const float* cur,
                                    const float* next, std::size_t n) {
  const __m256 two = _mm256_set1_ps(2.0f);
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 8 <= n; p += 8) {
    const __m256 a = _mm256_loadu_ps(prev + p);
    const __m256 b = _mm256_loadu_ps(cur + p);
    const __m256 c = _mm256_loadu_ps(next + p);
    __m256 lap = _mm256_add_ps(_mm256_sub_ps(a, _mm256_mul_ps(two, b)), c);
    lap = _mm256_and_ps(lap, abs_mask);
    acc_lo = _mm256_add_pd(acc_lo, _mm256_cvtps_pd(_mm256_castps256_ps128(lap)));
    acc_hi = _mm256_add_pd(acc_hi, _mm256_cvtps_pd(_mm256_extractf128_ps(lap, 1)));
  }
  double total = hsum(_mm256_add_pd(acc_lo, acc_hi));
  for (; p < n; ++p) total += std::fabs((prev[p] - 2.0f * cur[p]) + next[p]);
  return total;
}

SLC_AVX2 void accumulate(double* acc, const float* src, std::size_t n) {
  std::size_t p = 0;
  for (; p + 8 <= n; p += 8) {
    const __m256 s = _mm256_loadu_ps(src + p);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(s));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(s, 1));
    _mm256_storeu_pd(acc + p, _mm256_add_pd(_mm256_loadu_pd(acc + p), lo));
    _mm256_storeu_pd(acc + p + 4, _mm256_add_pd(_mm256_loadu_pd(acc + p + 4), hi));
  }
  for (; p < n; ++p) acc[p] += src[p];
}

SLC_AVX2 double sum(const float* src, std::size_t n) {
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 8 <= n; p += 8) {
    const __m256 s = _mm256_loadu_ps(src + p);
    acc_lo = _mm256_add_pd(acc_lo, _mm256_cvtps_pd(_mm256_castps256_ps128(s)));
    acc_hi = _mm256_add_pd(acc_hi, _mm256_cvtps_pd(_mm256_extractf128_ps(s, 1)));
  }
  double total = hsum(_mm256_add_pd(acc_lo, acc_hi));
  for (; p < n; ++p) total += src[p];
  return total;
}

SLC_AVX2 void luma_from_rgb(const std::uint8_t* rgb, float* out,
                            std::size_t pixels) {
  const __m256 wr = _mm256_set1_ps(0.299f);
  const __m256 wg = _mm256_set1_ps(0.587f);
  const __m256 wb = _mm256_set1_ps(0.114f);
  const __m256 scale = _mm256_set1_ps(255.0f);
  const __m256 one = _mm256_set1_ps(1.0f);
  alignas(32) float r[8], g[8], b[8];
  std::size_t p = 0;
  for (; p + 8 <= pixels; p += 8) {
    // Deinterleave through the stack; the arithmetic is what is vectorised.
    for (int k = 0; k < 8; ++k) {
      r[k] = rgb[3 * (p + k)];
      g[k] = rgb[3 * (p + k) + 1];
      b[k] = rgb[3 * (p + k) + 2];
    }
    __m256 y = _mm256_add_ps(_mm256_mul_ps(wr, _mm256_load_ps(r)),
                             _mm256_mul_ps(wg, _mm256_load_ps(g)));
    y = _mm256_add_ps(y, _mm256_mul_ps(wb, _mm256_load_ps(b)));
    _mm256_storeu_ps(out + p, _mm256_min_ps(_mm256_div_ps(y, scale), one));
  }
  for (; p < pixels; ++p) {
    const float rr = rgb[3 * p], gg = rgb[3 * p + 1], bb = rgb[3 * p + 2];
    const float y = (0.299f * rr + 0.587f * gg) + 0.114f * bb;
    out[p] = std::min(y / 255.0f, 1.0f);
  }
}

SLC_AVX2 void threshold_mask(const float* values, float threshold,
                             std::uint8_t* mask, std::size_t n) {
  const __m256 thr = _mm256_set1_ps(threshold);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const int bits = _mm256_movemask_ps(
        _mm256_cmp_ps(_mm256_loadu_ps(values + i), thr, _CMP_GE_OQ));
    for (int k = 0; k < 8; ++k) mask[i + k] = (bits >> k) & 1;
  }
  for (; i < n; ++i) mask[i] = values[i] >= threshold ? 1 : 0;
}

}  // namespace

const KernelTable avx2_table{Isa::avx2,     abs_second_diff_sum, accumulate,
                             sum,           luma_from_rgb,
                             threshold_mask};

}  // namespace slc::kernels::detail
