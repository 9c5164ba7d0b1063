#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "slc/kernels.hpp"

namespace slc::kernels::detail {
namespace {

double abs_second_diff_sum(const float* prev, const float* cur,
                           const float* next, std::size_t n) {
  const float32x4_t two = vdupq_n_f32(2.0f);
  float64x2_t acc_lo = vdupq_n_f64(0.0), acc_hi = vdupq_n_f64(0.0);
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    float32x4_t lap = vaddq_f32(
        vsubq_f32(vld1q_f32(prev + p), vmulq_f32(two, vld1q_f32(cur + p))),
        vld1q_f32(next + p));
    lap = vabsq_f32(lap);
    acc_lo = vaddq_f64(acc_lo, vcvt_f64_f32(vget_low_f32(lap)));
    acc_hi = vaddq_f64(acc_hi, vcvt_high_f64_f32(lap));
  }
  double total = vaddvq_f64(vaddq_f64(acc_lo, acc_hi));
  for (; p < n; ++p) total += std::fabs((prev[p] - 2.0f * cur[p]) + next[p]);
  return total;
}

void accumulate(double* acc, const float* src, std::size_t n) {
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    const float32x4_t s = vld1q_f32(src + p);
    vst1q_f64(acc + p, vaddq_f64(vld1q_f64(acc + p), vcvt_f64_f32(vget_low_f32(s))));
    vst1q_f64(acc + p + 2, vaddq_f64(vld1q_f64(acc + p + 2), vcvt_high_f64_f32(s)));
  }
  for (; p < n; ++p) acc[p] += src[p];
}

double sum(const float* src, std::size_t n) {
  float64x2_t acc_lo = vdupq_n_f64(0.0), acc_hi = vdupq_n_f64(0.0);
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    const float32x4_t s = vld1q_f32(src + p);
    acc_lo = vaddq_f64(acc_lo, vcvt_f64_f32(vget_low_f32(s)));
    acc_hi = vaddq_f64(acc_hi, vcvt_high_f64_f32(s));
  }
  double total = vaddvq_f64(vaddq_f64(acc_lo, acc_hi));
  for (; p < n; ++p) total += src[p];
  return total;
}

void luma_from_rgb(const std::uint8_t* rgb, float* out, std::size_t pixels) {
  const float32x4_t one = vdupq_n_f32(1.0f);
  const float32x4_t scale = vdupq_n_f32(255.0f);
  std::size_t p = 0;
  for (; p + 8 <= pixels; p += 8) {
    const uint8x8x3_t px = vld3_u8(rgb + 3 * p);
    const uint16x8_t r16 = vmovl_u8(px.val[0]);
    const uint16x8_t g16 = vmovl_u8(px.val[1]);
    const uint16x8_t b16 = vmovl_u8(px.val[2]);
    for (int half = 0; half < 2; ++half) {
      const float32x4_t r = vcvtq_f32_u32(vmovl_u16(half ? vget_high_u16(r16) : vget_low_u16(r16)));
      const float32x4_t g = vcvtq_f32_u32(vmovl_u16(half ? vget_high_u16(g16) : vget_low_u16(g16)));
      const float32x4_t b = vcvtq_f32_u32(vmovl_u16(half ? vget_high_u16(b16) : vget_low_u16(b16)));
      float32x4_t y = vaddq_f32(vmulq_n_f32(r, 0.299f), vmulq_n_f32(g, 0.587f));
      y = vaddq_f32(y, vmulq_n_f32(b, 0.114f));
      vst1q_f32(out + p + 4 * half, vminq_f32(vdivq_f32(y, scale), one));
    }
  }
  for (; p < pixels; ++p) {
    const float r = rgb[3 * p], g = rgb[3 * p + 1], b = rgb[3 * p + 2];
    out[p] = std::min(((0.299f * r + 0.587f * g) + 0.114f * b) / 255.0f, 1.0f);
  }
}

void threshold_mask(const float* values, float threshold, std::uint8_t* mask,
                    std::size_t n) {
  const float32x4_t thr = vdupq_n_f32(threshold);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const uint32x4_t ge = vcgeq_f32(vld1q_f32(values + i), thr);
    const uint16x4_t narrow = vmovn_u32(vshrq_n_u32(ge, 31));
    const uint8x8_t bytes = vmovn_u16(vcombine_u16(narrow, narrow));
    vst1_lane_u32(reinterpret_cast<uint32_t*>(mask + i),
                  vreinterpret_u32_u8(bytes), 0);
  }
  for (; i < n; ++i) mask[i] = values[i] >= threshold ? 1 : 0;
}

}  // namespace

const KernelTable neon_table{Isa::neon,     abs_second_diff_sum, accumulate,
                             sum,           luma_from_rgb,
                             threshold_mask};

}  // namespace slc::kernels::detail
