#include <algorithm>
#include <cmath>

#include "slc/kernels.hpp"

namespace slc::kernels::detail {
namespace {

double abs_second_diff_sum(const float* prev, const float* cur,
                           const float* next, std::size_t n) {
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const float lap = (prev[p] - 2.0f * cur[p]) + next[p];
    total += std::fabs(lap);
  }
  return total;
}

void accumulate(double* acc, const float* src, std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) acc[p] += src[p];
}

double sum(const float* src, std::size_t n) {
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) total += src[p];
  return total;
}

void luma_from_rgb(const std::uint8_t* rgb, float* out, std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) {
    const float r = rgb[3 * p], g = rgb[3 * p + 1], b = rgb[3 * p + 2];
    const float y = (0.299f * r + 0.587f * g) + 0.114f * b;
    out[p] = std::min(y / 255.0f, 1.0f);
  }
}

void threshold_mask(const float* values, float threshold, std::uint8_t* mask,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) mask[i] = values[i] >= threshold ? 1 : 0;
}

}  // namespace

const KernelTable scalar_table{Isa::scalar,    abs_second_diff_sum, accumulate,
                               sum,            luma_from_rgb,
                               threshold_mask};

}  // namespace slc::kernels::detail
